#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pivq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace pivq;

namespace {

Codebook make_codebook(std::vector<Embedding> entries) {
    Codebook cb;
    cb.dim = entries.empty() ? 0 : entries.front().size();
    cb.entries = std::move(entries);
    return cb;
}

std::vector<Embedding> random_embeddings(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<Embedding> out(n, Embedding(d));
    for (auto& e : out)
        for (double& v : e) v = rng.next_double() * 2.0 - 1.0;
    return out;
}

}  // namespace

TEST_CASE("distance matrix matches pairwise distances") {
    Codebook cb = make_codebook({{0.0}, {1.0}});
    DistanceMatrix dm = distance_matrix(cb, {{0.0}});
    REQUIRE(dm.rows == 2);
    REQUIRE(dm.cols == 1);
    CHECK(dm.at(0, 0) == 0.0);
    CHECK(dm.at(1, 0) == 1.0);

    // self distances on the diagonal
    Codebook cb2 = make_codebook({{1.0, 2.0}, {-3.0, 0.5}});
    DistanceMatrix dm2 = distance_matrix(cb2, cb2.entries);
    CHECK(dm2.at(0, 0) == 0.0);
    CHECK(dm2.at(1, 1) == 0.0);

    Rng rng(8);
    Codebook cb3 = make_codebook(random_embeddings(rng, 4, 3));
    std::vector<Embedding> zs = random_embeddings(rng, 3, 3);
    DistanceMatrix dm3 = distance_matrix(cb3, zs);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(dm3.at(i, j) == euclidean_distance(cb3.entries[i], zs[j]));

    CHECK_THROWS_AS(distance_matrix(cb, {{0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("nearest quantization picks closest entries") {
    Codebook cb = make_codebook({{0.0}, {10.0}});
    QuantizationResult r = nearest_quantize(cb, {{1.0}, {2.0}, {9.0}});
    CHECK(r.indices == std::vector<std::uint32_t>{0, 0, 1});
    CHECK(r.per_image_usage() == 2);
    CHECK(r.quantized[0] == cb.entries[0]);
    CHECK(r.quantized[2] == cb.entries[1]);
    CHECK(r.total_distance == doctest::Approx(1.0 + 2.0 + 1.0));

    // exact matches recover identity
    QuantizationResult id = nearest_quantize(cb, cb.entries);
    CHECK(id.indices == std::vector<std::uint32_t>{0, 1});
    CHECK(id.total_distance == 0.0);
    CHECK(id.per_image_usage() == 2);

    // equidistant: lowest index wins
    Codebook tie = make_codebook({{0.0}, {2.0}});
    QuantizationResult t = nearest_quantize(tie, {{1.0}, {1.0}});
    CHECK(t.indices == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("matching quantization uses distinct codes") {
    Codebook cb = make_codebook({{0.0}, {10.0}});
    QuantizationResult r = matching_quantize(cb, {{1.0}, {2.0}});
    CHECK(r.indices == std::vector<std::uint32_t>{0, 1});
    CHECK(r.total_distance == doctest::Approx(1.0 + 8.0));
    CHECK(r.code_set.codes() == std::vector<std::uint32_t>{0, 1});

    // nearest on the same input collapses both onto entry 0
    QuantizationResult n = nearest_quantize(cb, {{1.0}, {2.0}});
    CHECK(n.indices == std::vector<std::uint32_t>{0, 0});
    CHECK(n.per_image_usage() == 1);

    // exact recovery of distinct entries
    Codebook cb3 = make_codebook({{0.0, 0.0}, {1.0, 1.0}, {2.0, -1.0}});
    QuantizationResult exact = matching_quantize(cb3, {cb3.entries[2], cb3.entries[0]});
    CHECK(exact.indices == std::vector<std::uint32_t>{2, 0});
    CHECK(exact.total_distance == 0.0);

    // forced single choice
    Codebook one = make_codebook({{5.0}});
    CHECK(matching_quantize(one, {{-3.0}}).indices == std::vector<std::uint32_t>{0});

    // K < L violates the matching precondition
    CHECK_THROWS_AS(matching_quantize(one, {{0.0}, {1.0}}), std::invalid_argument);
}

TEST_CASE("matching invariants hold on random instances") {
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 1 + rng.next_below(3);
        std::size_t L = 1 + rng.next_below(6);
        std::size_t K = L + rng.next_below(3 * L + 1);
        Codebook cb = make_codebook(random_embeddings(rng, K, d));
        std::vector<Embedding> zs = random_embeddings(rng, L, d);

        QuantizationResult m = matching_quantize(cb, zs);
        REQUIRE(m.indices.size() == L);
        std::set<std::uint32_t> distinct(m.indices.begin(), m.indices.end());
        CHECK(distinct.size() == L);          // pairwise distinct
        CHECK(m.code_set.size() == L);        // |code_set| == L
        for (std::size_t j = 0; j < L; ++j) {
            CHECK(m.quantized[j] == cb.entries[m.indices[j]]);
        }

        // nearest is the unconstrained minimum of the same objective
        QuantizationResult n = nearest_quantize(cb, zs);
        CHECK(n.total_distance <= m.total_distance + 1e-12);

        // nearest is idempotent on its own output
        QuantizationResult again = nearest_quantize(cb, n.quantized);
        CHECK(again.indices == n.indices);
    }
}

TEST_CASE("permuting the input permutes indices but not the code set") {
    Rng rng(88);
    Codebook cb = make_codebook(random_embeddings(rng, 12, 2));
    std::vector<Embedding> zs = random_embeddings(rng, 5, 2);
    QuantizationResult base = matching_quantize(cb, zs);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> perm(zs.size());
        for (std::size_t j = 0; j < zs.size(); ++j) perm[j] = j;
        rng.shuffle(perm);
        std::vector<Embedding> pz(zs.size());
        for (std::size_t j = 0; j < zs.size(); ++j) pz[j] = zs[perm[j]];

        QuantizationResult p = matching_quantize(cb, pz);
        CHECK(p.code_set == base.code_set);
        CHECK(p.total_distance == doctest::Approx(base.total_distance).epsilon(1e-12));
        for (std::size_t j = 0; j < zs.size(); ++j) {
            CHECK(p.indices[j] == base.indices[perm[j]]);
        }

        QuantizationResult pn = nearest_quantize(cb, pz);
        QuantizationResult bn = nearest_quantize(cb, zs);
        CHECK(pn.code_set == bn.code_set);
        for (std::size_t j = 0; j < zs.size(); ++j) {
            CHECK(pn.indices[j] == bn.indices[perm[j]]);
        }
    }
}

TEST_CASE("squared distances can change the matching optimum") {
    // one dimension is not enough to separate the two objectives; this
    // 2-d instance has |a-e0|=0, |a-e1|=3, |b-e0|=3, |b-e1|=5:
    // plain distances favour (a->e0, b->e1) with 0+5=5 over 3+3=6,
    // squared favour (a->e1, b->e0) with 9+9=18 over 0+25=25.
    const double y = std::sqrt(9.0 - 49.0 / 36.0);
    Codebook cb = make_codebook({{0.0, 0.0}, {-7.0 / 6.0, y}});
    std::vector<Embedding> zs = {{0.0, 0.0}, {3.0, 0.0}};
    REQUIRE(euclidean_distance(cb.entries[0], zs[0]) == doctest::Approx(0.0));
    REQUIRE(euclidean_distance(cb.entries[1], zs[0]) == doctest::Approx(3.0));
    REQUIRE(euclidean_distance(cb.entries[1], zs[1]) == doctest::Approx(5.0));
    REQUIRE(euclidean_distance(cb.entries[0], zs[1]) == doctest::Approx(3.0));

    QuantizationResult plain = matching_quantize(cb, zs, false);
    QuantizationResult squared = matching_quantize(cb, zs, true);
    CHECK(plain.indices == std::vector<std::uint32_t>{0, 1});
    CHECK(squared.indices == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("straight-through value and gradient rules") {
    Embedding z_e = {1.0, 1.0};
    Embedding z_q = {2.0, 3.0};
    CHECK(straight_through(z_e, z_q) == z_q);
    CHECK_THROWS_AS(straight_through({1.0}, {1.0, 2.0}), std::invalid_argument);

    Embedding g = {0.5, -2.0, 7.0};
    CHECK(straight_through_grad(g) == g);

    // degenerate case: z_e == z_q behaves as the identity both ways
    CHECK(straight_through(z_q, z_q) == z_q);
}

TEST_CASE("usage accumulation counts codes") {
    Codebook cb = make_codebook({{0.0}, {10.0}, {20.0}, {30.0}});

    UsageStats stats;
    stats.histogram.assign(4, 0);

    QuantizationResult r1 = nearest_quantize(cb, {{1.0}, {2.0}, {9.0}});
    REQUIRE(r1.indices == std::vector<std::uint32_t>{0, 0, 1});
    stats = accumulate_usage(std::move(stats), r1);
    CHECK(stats.dataset_usage() == 2);
    CHECK(stats.max_per_sample == 2);
    CHECK(stats.samples_seen == 1);

    QuantizationResult r2 = nearest_quantize(cb, {{19.0}, {31.0}});
    REQUIRE(r2.indices == std::vector<std::uint32_t>{2, 3});
    stats = accumulate_usage(std::move(stats), r2);
    CHECK(stats.dataset_usage() == 4);  // disjoint pairs union to 4
    CHECK(stats.samples_seen == 2);

    // matching with L entries always records K_img == L
    Rng rng(19);
    Codebook big = make_codebook(random_embeddings(rng, 9, 2));
    UsageStats ms;
    ms.histogram.assign(9, 0);
    for (int s = 0; s < 10; ++s) {
        QuantizationResult mr = matching_quantize(big, random_embeddings(rng, 5, 2));
        CHECK(mr.per_image_usage() == 5);
        ms = accumulate_usage(std::move(ms), mr);
    }
    CHECK(ms.max_per_sample == 5);
    CHECK(ms.samples_seen == 10);

    // out-of-range index rejected
    UsageStats tiny;
    tiny.histogram.assign(1, 0);
    CHECK_THROWS_AS(accumulate_usage(std::move(tiny), r2), std::out_of_range);
}

TEST_CASE("method names round-trip") {
    CHECK(quantize_method_from_string("nearest") == QuantizeMethod::Nearest);
    CHECK(quantize_method_from_string("matching") == QuantizeMethod::Matching);
    CHECK(std::string(to_string(QuantizeMethod::Matching)) == "matching");
    CHECK_THROWS_AS(quantize_method_from_string("fancy"), std::invalid_argument);
}
