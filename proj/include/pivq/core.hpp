// Core domain types shared by every pivq module: embeddings, codebooks,
// code sets, usage statistics and the deterministic RNG.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pivq {

/// A single latent vector of dimension d. All entries must be finite.
using Embedding = std::vector<double>;

/// Throws std::invalid_argument if any entry of `v` is NaN or infinite.
void require_finite(const Embedding& v, const char* what);

/// Euclidean distance ||a - b||_2. Throws on dimension mismatch.
double euclidean_distance(const Embedding& a, const Embedding& b);

/// Ordered list of K learnable d-dimensional vectors.
struct Codebook {
    std::size_t dim = 0;
    std::vector<Embedding> entries;

    Codebook() = default;
    Codebook(std::size_t dim_, std::vector<Embedding> entries_);

    std::size_t size() const { return entries.size(); }

    /// Checks K >= 1, uniform dimension and finiteness; throws otherwise.
    void validate() const;
};

/// A set of distinct code indices, stored canonically as a sorted list.
class CodeSet {
public:
    CodeSet() = default;

    /// Builds from arbitrary indices: sorts and removes duplicates.
    static CodeSet from_indices(std::span<const std::uint32_t> indices);
    static CodeSet from_indices(std::initializer_list<std::uint32_t> indices);

    /// Wraps an already sorted, duplicate-free list. Throws if it is not.
    static CodeSet from_sorted_unique(std::vector<std::uint32_t> codes);

    const std::vector<std::uint32_t>& codes() const { return codes_; }
    std::size_t size() const { return codes_.size(); }
    bool empty() const { return codes_.empty(); }
    bool contains(std::uint32_t code) const;
    std::uint32_t max_code() const;  // throws if empty

    bool operator==(const CodeSet&) const = default;

private:
    std::vector<std::uint32_t> codes_;
};

CodeSet set_union(const CodeSet& a, const CodeSet& b);
CodeSet set_intersection(const CodeSet& a, const CodeSet& b);
CodeSet set_difference(const CodeSet& a, const CodeSet& b);
CodeSet symmetric_difference(const CodeSet& a, const CodeSet& b);
bool is_subset(const CodeSet& inner, const CodeSet& outer);

/// K x L matrix of pairwise Euclidean distances (codebook rows, embedding
/// columns).
struct DistanceMatrix {
    std::size_t rows = 0;  // K
    std::size_t cols = 0;  // L
    std::vector<double> values;  // row-major

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Codebook usage counters: a per-code histogram plus the running maximum
/// of per-sample distinct-code counts (K_img) across everything seen.
struct UsageStats {
    std::vector<std::uint64_t> histogram;
    std::uint32_t max_per_sample = 0;  // max K_img
    std::uint64_t samples_seen = 0;

    UsageStats() = default;
    explicit UsageStats(std::size_t codebook_size) : histogram(codebook_size, 0) {}

    /// K_data: number of distinct codes used at least once.
    std::uint32_t dataset_usage() const;

    /// Associative, commutative merge: histograms add, maxima combine.
    void merge(const UsageStats& other);
};

/// Deterministic counter-based random generator.
///
/// The generator is fully specified by:
///     output(i) = mix(seed + i * 0x9E3779B97F4A7C15)     for i = 1, 2, ...
/// where mix is the SplitMix64 finalizer
///     z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///     z ^= z >> 27; z *= 0x94D049BB133111EB;
///     z ^= z >> 31;
/// All integer-valued draws (next_u64, next_below) are exact functions of
/// (seed, call index) and therefore reproduce bit-for-bit on any platform.
/// Floating-point draws are derived from the integer stream; next_double
/// uses the top 53 bits and is likewise exact, while next_normal goes
/// through libm (log/cos) and is deterministic per platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double();

    /// Uniform integer in [0, n). Unbiased via rejection. n must be >= 1.
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double next_normal();

    /// Fisher-Yates shuffle driven by next_below.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Derives an independently seeded child generator. Children with
    /// distinct stream ids have unrelated output streams; the parent's
    /// state is not advanced.
    Rng split(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace pivq
