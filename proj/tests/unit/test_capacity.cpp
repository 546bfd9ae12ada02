#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pivq/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

using namespace pivq;

namespace {

// Independent log2(C(n, r)) via log-gamma, good to ~1e-9 relative.
double lgamma_log2_binomial(double n, double r) {
    const double ln2 = 0.6931471805599453;
    return (std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0)) / ln2;
}

// Counts length-len non-decreasing sequences over {0..k_data-1} touching
// at most `budget` distinct symbols. Plain recursion; test-only oracle.
std::uint64_t count_multisets(std::uint64_t k_data, std::uint64_t budget, std::uint64_t len,
                              std::uint64_t min_symbol) {
    if (len == 0) return 1;
    if (budget == 0) return 0;
    std::uint64_t total = 0;
    for (std::uint64_t s = min_symbol; s < k_data; ++s) {
        // use symbol s one or more times, then move to strictly larger ones
        for (std::uint64_t reps = 1; reps <= len; ++reps) {
            total += count_multisets(k_data, budget - 1, len - reps, s + 1);
        }
    }
    return total;
}

std::uint64_t count_subsets(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    std::uint64_t num = 1, den = 1;
    for (std::uint64_t i = 0; i < r; ++i) {
        num *= n - i;
        den *= i + 1;
    }
    return num / den;
}

}  // namespace

TEST_CASE("binomial coefficients are exact") {
    CHECK(binomial(4, 2) == 6);
    CHECK(binomial(10, 0) == 1);
    CHECK(binomial(0, 0) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(52, 5) == 2598960);
    // symmetry on a value too big for 64 bits
    CHECK(binomial(100, 37) == binomial(100, 63));
    CHECK(log2_of(binomial(4096, 512)) == doctest::Approx(2220.7096).epsilon(1e-3));
}

TEST_CASE("log2 of big integers") {
    CHECK(log2_of(BigInt(1)) == 0.0);
    CHECK(log2_of(BigInt(1024)) == 10.0);
    CHECK(log2_of(BigInt(6)) == doctest::Approx(2.584962500721156).epsilon(1e-14));
    BigInt huge = 1;
    mpz_mul_2exp(huge.get_mpz_t(), huge.get_mpz_t(), 10000);  // 2^10000
    CHECK(log2_of(huge) == 10000.0);
    CHECK_THROWS_AS(log2_of(BigInt(0)), std::invalid_argument);
    CHECK_THROWS_AS(log2_of(BigInt(-3)), std::invalid_argument);
}

TEST_CASE("log2 binomial agrees with log-gamma") {
    const std::vector<std::pair<std::uint64_t, std::uint64_t>> cases = {
        {10, 3}, {100, 50}, {1000, 17}, {4096, 512}, {10000, 137}, {10000, 5000}};
    for (auto [n, r] : cases) {
        double exact = log2_of(binomial(n, r));
        double approx = lgamma_log2_binomial(static_cast<double>(n), static_cast<double>(r));
        CHECK(std::abs(exact - approx) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("capacity params enforce their invariants") {
    CHECK_NOTHROW(CapacityParams(4, 2, 3));
    CHECK_NOTHROW(CapacityParams(4, 4, 4));
    CHECK_THROWS_AS(CapacityParams(4, 5, 5), std::invalid_argument);  // K_img > K_data
    CHECK_THROWS_AS(CapacityParams(4, 3, 2), std::invalid_argument);  // K_img > L
    CHECK_THROWS_AS(CapacityParams(4, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(CapacityParams(0, 0, 2), std::invalid_argument);
}

TEST_CASE("working subset count") {
    CHECK(working_subset_count(CapacityParams(4, 2, 2)) == 6);
    CHECK(working_subset_count(CapacityParams(5, 5, 5)) == 1);  // K_data == K_img
    CHECK(working_subset_count(CapacityParams(6, 3, 3)) == 20);
    CHECK(working_subset_count(CapacityParams(6, 3, 3)) == count_subsets(6, 3));
}

TEST_CASE("multiset count via stars and bars") {
    CHECK(multiset_count(3, 2) == 4);   // C(3+1, 1) = 4
    CHECK(multiset_count(7, 1) == 1);   // only the constant sequence
    CHECK(multiset_count(0, 3) == 1);   // empty representation
    CHECK(multiset_count(5, 3) == 21);  // C(7, 2)
    CHECK_THROWS_AS(multiset_count(3, 0), std::invalid_argument);

    // oracle: enumerate non-decreasing sequences with exactly k_img symbols
    // available (no distinctness cap beyond the alphabet size)
    for (std::uint64_t k_img = 1; k_img <= 4; ++k_img) {
        for (std::uint64_t len = 0; len <= 5; ++len) {
            std::uint64_t enumerated = count_multisets(k_img, k_img, len, 0);
            CHECK(multiset_count(len, k_img) == BigInt(static_cast<unsigned long>(enumerated)));
        }
    }
}

TEST_CASE("nearest capacity bits") {
    // |S| * |R| = C(4,2) * multiset(3,2) = 6 * 4 = 24
    CHECK(nearest_capacity_bits(4, 2, 3) == doctest::Approx(std::log2(24.0)).epsilon(1e-14));
    CHECK(nearest_capacity_bits(1, 1, 1) == 0.0);
    double paper_point = nearest_capacity_bits(4096, 49, 512);
    CHECK(std::abs(paper_point - 614.0) <= 5.0);
    // independent recomputation of the same quantity
    double oracle = lgamma_log2_binomial(4096.0, 49.0) + lgamma_log2_binomial(512.0 + 48.0, 48.0);
    CHECK(paper_point == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("matching capacity bits") {
    CHECK(matching_capacity_bits(4, 2) == doctest::Approx(std::log2(6.0)).epsilon(1e-14));
    CHECK(matching_capacity_bits(512, 512) == 0.0);  // K_data == L: one subset
    double paper_point = matching_capacity_bits(4096, 512);
    CHECK(std::abs(paper_point - 2221.0) <= 1.0);
    CHECK_THROWS_AS(matching_capacity_bits(4, 5), std::invalid_argument);
}

TEST_CASE("standard vq capacity bits") {
    CHECK(standard_vq_capacity_bits(1024, 256) == 2560.0);
    CHECK(standard_vq_capacity_bits(1, 7) == 0.0);
    CHECK(standard_vq_capacity_bits(4096, 512) == 6144.0);
}

TEST_CASE("capacity ordering matches the published comparison") {
    // matching < nearest-bound < standard at the paper's operating point
    double m = matching_capacity_bits(4096, 512);
    double n = nearest_capacity_bits(4096, 49, 512);
    double s = standard_vq_capacity_bits(4096, 512);
    CHECK(n < m);
    CHECK(m < s);
}

TEST_CASE("capacity curve rows") {
    std::vector<CapacityCurveRow> rows = capacity_curve(4096, 49, {512});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].len == 512);
    CHECK(rows[0].standard_bits == 6144.0);
    CHECK(std::abs(rows[0].nearest_bits - 614.0) <= 5.0);
    CHECK(std::abs(rows[0].matching_bits - 2221.0) <= 1.0);

    // L = 1: one choice out of K for every method that uses one code
    std::vector<CapacityCurveRow> one = capacity_curve(64, 8, {1});
    CHECK(one[0].matching_bits == doctest::Approx(std::log2(64.0)).epsilon(1e-12));
    CHECK(one[0].standard_bits == doctest::Approx(std::log2(64.0)).epsilon(1e-12));
    // K_img clamps to L = 1: |S| = C(64,1), |R| = 1
    CHECK(one[0].nearest_bits == doctest::Approx(std::log2(64.0)).epsilon(1e-12));

    // matching capacity is non-decreasing in L up to K/2
    std::vector<std::uint64_t> lens;
    for (std::uint64_t l = 1; l <= 8; ++l) lens.push_back(l);
    std::vector<CapacityCurveRow> curve = capacity_curve(16, 4, lens);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].matching_bits >= curve[i - 1].matching_bits);
        CHECK(curve[i].standard_bits > curve[i - 1].standard_bits);
    }
}

TEST_CASE("enumeration oracles agree with the closed forms") {
    CHECK(enumerate_representations(CapacityModel::Matching, 4, 2, 2) == 6);
    CHECK(enumerate_representations(CapacityModel::Nearest, 3, 2, 2) == 6);
    CHECK(enumerate_representations(CapacityModel::Nearest, 1, 1, 1) == 1);
    CHECK_THROWS_AS(enumerate_representations(CapacityModel::Matching, 9, 2, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(enumerate_representations(CapacityModel::Matching, 4, 2, 7),
                    std::invalid_argument);

    for (std::uint64_t k_data = 1; k_data <= 6; ++k_data) {
        for (std::uint64_t len = 1; len <= 5 && len <= k_data; ++len) {
            // matching: exactly the len-subsets of the codebook
            CHECK(enumerate_representations(CapacityModel::Matching, k_data, 1, len) ==
                  count_subsets(k_data, len));
            for (std::uint64_t k_img = 1; k_img <= std::min(k_data, len); ++k_img) {
                std::uint64_t achieved =
                    enumerate_representations(CapacityModel::Nearest, k_data, k_img, len);
                // independent recursion over non-decreasing sequences
                CHECK(achieved == count_multisets(k_data, k_img, len, 0));
                // the product bound |S|*|R| over-counts shared multisets
                BigInt bound = working_subset_count(CapacityParams(k_data, k_img, len)) *
                               multiset_count(len, k_img);
                CHECK(BigInt(static_cast<unsigned long>(achieved)) <= bound);
                if (k_img >= 2 && k_data > k_img) {
                    CHECK(BigInt(static_cast<unsigned long>(achieved)) < bound);
                }
            }
        }
    }
}
