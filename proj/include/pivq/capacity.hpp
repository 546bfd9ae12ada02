// Exact combinatorics for the information-capacity bounds of discrete
// permutation-invariant representations, plus small-instance enumeration
// oracles. All counts are computed with arbitrary-precision integers and
// only converted to log2 at the end.
#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <string>
#include <vector>

namespace pivq {

using BigInt = mpz_class;

/// Exact n! / (r! (n-r)!); zero when r > n.
BigInt binomial(std::uint64_t n, std::uint64_t r);

/// log2 of a positive big integer, from bit length plus normalized
/// mantissa; accurate to double precision. Throws for x < 1.
double log2_of(const BigInt& x);

/// Parameters of the capacity bounds: dataset-level usage K_data,
/// per-image usage K_img, representation length L.
struct CapacityParams {
    std::uint64_t k_data;
    std::uint64_t k_img;
    std::uint64_t len;

    CapacityParams(std::uint64_t k_data_, std::uint64_t k_img_, std::uint64_t len_);
};

/// |S| = C(K_data, K_img): choices of the per-image working subset.
BigInt working_subset_count(const CapacityParams& p);

/// |R| = C(L + K_img - 1, K_img - 1): length-L multisets over K_img
/// symbols (stars and bars). Requires K_img >= 1.
BigInt multiset_count(std::uint64_t len, std::uint64_t k_img);

/// Upper bound on per-image capacity under nearest-neighbour
/// quantization: log2(|S| * |R|) bits.
double nearest_capacity_bits(const CapacityParams& p);
double nearest_capacity_bits(std::uint64_t k_data, std::uint64_t k_img, std::uint64_t len);

/// Capacity under matching quantization: log2 C(K_data, L) bits.
/// Requires L <= K_data.
double matching_capacity_bits(std::uint64_t k_data, std::uint64_t len);

/// Conventional position-dependent VQ bottleneck: L * log2(K) bits.
double standard_vq_capacity_bits(std::uint64_t k, std::uint64_t len);

struct CapacityCurveRow {
    std::uint64_t len;
    double standard_bits;
    double nearest_bits;   // K_img clamped to min(K_img, L)
    double matching_bits;
};

/// Capacity of all three approaches over a range of representation
/// lengths at fixed codebook size K (taken as K_data for the bounds).
std::vector<CapacityCurveRow> capacity_curve(std::uint64_t k, std::uint64_t k_img_nearest,
                                             const std::vector<std::uint64_t>& lens);

enum class CapacityModel { Nearest, Matching };

/// Exhaustive count of achievable representations on small instances
/// (k_data <= 8, len <= 6). Nearest model: length-len multisets over
/// {0..k_data-1} using at most k_img distinct symbols. Matching model:
/// size-len subsets (k_img ignored).
std::uint64_t enumerate_representations(CapacityModel model, std::uint64_t k_data,
                                        std::uint64_t k_img, std::uint64_t len);

}  // namespace pivq
