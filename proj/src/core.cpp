#include "pivq/core.hpp"

#include <algorithm>
#include <cmath>

namespace pivq {

void require_finite(const Embedding& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
        }
    }
}

double euclidean_distance(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("euclidean_distance: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

Codebook::Codebook(std::size_t dim_, std::vector<Embedding> entries_)
    : dim(dim_), entries(std::move(entries_)) {
    validate();
}

void Codebook::validate() const {
    if (entries.empty()) {
        throw std::invalid_argument("Codebook: must hold at least one entry");
    }
    if (dim == 0) {
        throw std::invalid_argument("Codebook: dimension must be positive");
    }
    for (const Embedding& e : entries) {
        if (e.size() != dim) {
            throw std::invalid_argument("Codebook: entry dimension " +
                                        std::to_string(e.size()) + " != " +
                                        std::to_string(dim));
        }
        require_finite(e, "Codebook entry");
    }
}

CodeSet CodeSet::from_indices(std::span<const std::uint32_t> indices) {
    CodeSet s;
    s.codes_.assign(indices.begin(), indices.end());
    std::sort(s.codes_.begin(), s.codes_.end());
    s.codes_.erase(std::unique(s.codes_.begin(), s.codes_.end()), s.codes_.end());
    return s;
}

CodeSet CodeSet::from_indices(std::initializer_list<std::uint32_t> indices) {
    return from_indices(std::span<const std::uint32_t>(indices.begin(), indices.size()));
}

CodeSet CodeSet::from_sorted_unique(std::vector<std::uint32_t> codes) {
    for (std::size_t i = 1; i < codes.size(); ++i) {
        if (codes[i - 1] >= codes[i]) {
            throw std::invalid_argument("CodeSet: list is not sorted and duplicate-free");
        }
    }
    CodeSet s;
    s.codes_ = std::move(codes);
    return s;
}

bool CodeSet::contains(std::uint32_t code) const {
    return std::binary_search(codes_.begin(), codes_.end(), code);
}

std::uint32_t CodeSet::max_code() const {
    if (codes_.empty()) throw std::logic_error("CodeSet::max_code on empty set");
    return codes_.back();
}

CodeSet set_union(const CodeSet& a, const CodeSet& b) {
    std::vector<std::uint32_t> out;
    std::set_union(a.codes().begin(), a.codes().end(), b.codes().begin(),
                   b.codes().end(), std::back_inserter(out));
    return CodeSet::from_sorted_unique(std::move(out));
}

CodeSet set_intersection(const CodeSet& a, const CodeSet& b) {
    std::vector<std::uint32_t> out;
    std::set_intersection(a.codes().begin(), a.codes().end(), b.codes().begin(),
                          b.codes().end(), std::back_inserter(out));
    return CodeSet::from_sorted_unique(std::move(out));
}

CodeSet set_difference(const CodeSet& a, const CodeSet& b) {
    std::vector<std::uint32_t> out;
    std::set_difference(a.codes().begin(), a.codes().end(), b.codes().begin(),
                        b.codes().end(), std::back_inserter(out));
    return CodeSet::from_sorted_unique(std::move(out));
}

CodeSet symmetric_difference(const CodeSet& a, const CodeSet& b) {
    std::vector<std::uint32_t> out;
    std::set_symmetric_difference(a.codes().begin(), a.codes().end(),
                                  b.codes().begin(), b.codes().end(),
                                  std::back_inserter(out));
    return CodeSet::from_sorted_unique(std::move(out));
}

bool is_subset(const CodeSet& inner, const CodeSet& outer) {
    return std::includes(outer.codes().begin(), outer.codes().end(),
                         inner.codes().begin(), inner.codes().end());
}

std::uint32_t UsageStats::dataset_usage() const {
    std::uint32_t used = 0;
    for (std::uint64_t c : histogram) {
        if (c > 0) ++used;
    }
    return used;
}

void UsageStats::merge(const UsageStats& other) {
    if (histogram.size() < other.histogram.size()) {
        histogram.resize(other.histogram.size(), 0);
    }
    for (std::size_t i = 0; i < other.histogram.size(); ++i) {
        histogram[i] += other.histogram[i];
    }
    max_per_sample = std::max(max_per_sample, other.max_per_sample);
    samples_seen += other.samples_seen;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGolden);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be >= 1");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::next_normal() {
    // Box-Muller. Guard u1 away from zero so log stays finite.
    const double u1 = std::max(next_double(), 0x1.0p-60);
    const double u2 = next_double();
    constexpr double two_pi = 6.28318530717958647692;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

Rng Rng::split(std::uint64_t stream) const {
    return Rng(mix64(seed_ ^ mix64(stream + kGolden)));
}

}  // namespace pivq
