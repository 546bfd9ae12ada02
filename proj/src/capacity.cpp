#include "pivq/capacity.hpp"

#include <cmath>
#include <stdexcept>

namespace pivq {

BigInt binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return BigInt(0);
    BigInt out;
    mpz_bin_uiui(out.get_mpz_t(), n, r);
    return out;
}

double log2_of(const BigInt& x) {
    if (x < 1) {
        throw std::invalid_argument("log2_of: argument must be >= 1");
    }
    long exp = 0;
    const double mantissa = mpz_get_d_2exp(&exp, x.get_mpz_t());  // x = mantissa * 2^exp
    return static_cast<double>(exp) + std::log2(mantissa);
}

CapacityParams::CapacityParams(std::uint64_t k_data_, std::uint64_t k_img_, std::uint64_t len_)
    : k_data(k_data_), k_img(k_img_), len(len_) {
    if (k_data == 0 || k_img == 0 || len == 0) {
        throw std::invalid_argument("CapacityParams: all parameters must be positive");
    }
    if (k_img > k_data) {
        throw std::invalid_argument("CapacityParams: K_img must be <= K_data");
    }
    if (k_img > len) {
        throw std::invalid_argument("CapacityParams: K_img must be <= L");
    }
}

BigInt working_subset_count(const CapacityParams& p) {
    return binomial(p.k_data, p.k_img);
}

BigInt multiset_count(std::uint64_t len, std::uint64_t k_img) {
    if (k_img == 0) {
        throw std::invalid_argument("multiset_count: K_img must be >= 1");
    }
    return binomial(len + k_img - 1, k_img - 1);
}

double nearest_capacity_bits(const CapacityParams& p) {
    return log2_of(working_subset_count(p) * multiset_count(p.len, p.k_img));
}

double nearest_capacity_bits(std::uint64_t k_data, std::uint64_t k_img, std::uint64_t len) {
    return nearest_capacity_bits(CapacityParams(k_data, k_img, len));
}

double matching_capacity_bits(std::uint64_t k_data, std::uint64_t len) {
    if (len > k_data) {
        throw std::invalid_argument("matching_capacity_bits: requires L <= K_data");
    }
    return log2_of(binomial(k_data, len));
}

double standard_vq_capacity_bits(std::uint64_t k, std::uint64_t len) {
    if (k == 0) {
        throw std::invalid_argument("standard_vq_capacity_bits: K must be >= 1");
    }
    return static_cast<double>(len) * std::log2(static_cast<double>(k));
}

std::vector<CapacityCurveRow> capacity_curve(std::uint64_t k, std::uint64_t k_img_nearest,
                                             const std::vector<std::uint64_t>& lens) {
    if (k == 0 || k_img_nearest == 0) {
        throw std::invalid_argument("capacity_curve: K and K_img must be >= 1");
    }
    std::vector<CapacityCurveRow> rows;
    rows.reserve(lens.size());
    for (std::uint64_t len : lens) {
        if (len == 0 || len > k) {
            throw std::invalid_argument("capacity_curve: lengths must satisfy 1 <= L <= K");
        }
        const std::uint64_t k_img = std::min(k_img_nearest, len);
        rows.push_back({len, standard_vq_capacity_bits(k, len),
                        nearest_capacity_bits(k, k_img, len), matching_capacity_bits(k, len)});
    }
    return rows;
}

namespace {

// Counts non-decreasing length-`len` sequences over {next..k_data-1},
// extending a prefix that already uses `distinct_used` symbols and may
// still introduce `budget` new ones.
std::uint64_t count_multisets(std::uint64_t k_data, std::uint64_t len, std::uint64_t next,
                              std::uint64_t budget) {
    if (len == 0) return 1;
    if (budget == 0 || next >= k_data) return 0;
    std::uint64_t total = 0;
    for (std::uint64_t sym = next; sym < k_data; ++sym) {
        // `sym` appears somewhere from 1 to len times.
        for (std::uint64_t reps = 1; reps <= len; ++reps) {
            total += count_multisets(k_data, len - reps, sym + 1, budget - 1);
        }
    }
    return total;
}

std::uint64_t count_subsets(std::uint64_t k_data, std::uint64_t len, std::uint64_t next) {
    if (len == 0) return 1;
    if (next >= k_data || k_data - next < len) return 0;
    std::uint64_t total = 0;
    for (std::uint64_t sym = next; sym < k_data; ++sym) {
        total += count_subsets(k_data, len - 1, sym + 1);
    }
    return total;
}

}  // namespace

std::uint64_t enumerate_representations(CapacityModel model, std::uint64_t k_data,
                                        std::uint64_t k_img, std::uint64_t len) {
    if (k_data > 8 || len > 6) {
        throw std::invalid_argument("enumerate_representations: instance too large "
                                    "(requires k_data <= 8 and len <= 6)");
    }
    if (k_data == 0) {
        return len == 0 ? 1 : 0;
    }
    if (model == CapacityModel::Matching) {
        return count_subsets(k_data, len, 0);
    }
    if (len == 0) return 1;
    return count_multisets(k_data, len, 0, k_img);
}

}  // namespace pivq
