#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pivq/probing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

using namespace pivq;

namespace {

// Random matching-style dataset: each sample is L distinct codes out of k.
std::vector<CodedSample> random_dataset(Rng& rng, std::size_t n, std::uint32_t k,
                                        std::size_t l) {
    std::vector<CodedSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::uint32_t> codes;
        while (codes.size() < l) codes.insert(static_cast<std::uint32_t>(rng.next_below(k)));
        out.push_back({"s" + std::to_string(i),
                       CodeSet::from_indices(std::vector<std::uint32_t>(codes.begin(), codes.end()))});
    }
    return out;
}

std::vector<int> presence_labels(const std::vector<CodedSample>& data, std::uint32_t code) {
    std::vector<int> y;
    for (const CodedSample& s : data) y.push_back(s.codes.contains(code) ? 1 : 0);
    return y;
}

}  // namespace

TEST_CASE("presence matrix marks member codes") {
    std::vector<CodedSample> data;
    data.push_back({"a", CodeSet::from_indices({0, 2})});
    PresenceMatrix x = build_presence(data, 4);
    REQUIRE(x.rows == 1);
    REQUIRE(x.cols == 4);
    CHECK(x.row(0) == std::vector<double>{1.0, 0.0, 1.0, 0.0});

    PresenceMatrix empty = build_presence({}, 4);
    CHECK(empty.rows == 0);
    CHECK(empty.cols == 4);

    std::vector<CodedSample> bad;
    bad.push_back({"z", CodeSet::from_indices({4})});
    CHECK_THROWS_AS(build_presence(bad, 4), std::out_of_range);
}

TEST_CASE("presence rows sum to L on matching-style datasets") {
    Rng rng(41);
    std::vector<CodedSample> data = random_dataset(rng, 60, 12, 5);
    PresenceMatrix x = build_presence(data, 12);
    for (std::size_t r = 0; r < x.rows; ++r) {
        double sum = 0.0;
        for (double v : x.row(r)) {
            CHECK((v == 0.0 || v == 1.0));
            sum += v;
        }
        CHECK(sum == 5.0);
    }
}

TEST_CASE("presence features are set-determined") {
    std::vector<CodedSample> a, b;
    a.push_back({"x", CodeSet::from_indices({3, 1, 7})});
    b.push_back({"x", CodeSet::from_indices({7, 3, 1, 1})});
    PresenceMatrix xa = build_presence(a, 8);
    PresenceMatrix xb = build_presence(b, 8);
    CHECK(xa.values == xb.values);
}

TEST_CASE("logistic fit separates a single-code attribute") {
    Rng rng(53);
    std::vector<CodedSample> data = random_dataset(rng, 200, 10, 3);
    PresenceMatrix x = build_presence(data, 10);
    std::vector<int> y = presence_labels(data, 4);

    // make sure both classes actually occur in the draw
    REQUIRE(std::count(y.begin(), y.end(), 1) > 10);
    REQUIRE(std::count(y.begin(), y.end(), 0) > 10);

    LogisticModel model = fit_logistic(x, y);
    CHECK_FALSE(model.degenerate);

    std::vector<std::size_t> all_rows(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) all_rows[i] = i;
    CHECK(accuracy(model, x, y, all_rows) == 1.0);

    // the predictive weight dominates every other coordinate
    for (std::size_t c = 0; c < 10; ++c) {
        if (c == 4) continue;
        CHECK(model.weights[4] > std::abs(model.weights[c]));
    }
    CHECK(model.weights[4] > 0.0);
}

TEST_CASE("logistic fit handles degenerate and malformed labels") {
    std::vector<CodedSample> data;
    data.push_back({"a", CodeSet::from_indices({0})});
    data.push_back({"b", CodeSet::from_indices({1})});
    PresenceMatrix x = build_presence(data, 2);

    LogisticModel constant = fit_logistic(x, {1, 1});
    CHECK(constant.degenerate);
    CHECK(constant.predict(x.row(0)) == 1);
    CHECK(constant.predict(x.row(1)) == 1);

    LogisticModel zeros = fit_logistic(x, {0, 0});
    CHECK(zeros.degenerate);
    CHECK(zeros.predict(x.row(0)) == 0);

    CHECK_THROWS_AS(fit_logistic(x, {0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_logistic(x, {0}), std::invalid_argument);
}

TEST_CASE("all-zero feature columns keep zero weight") {
    std::vector<CodedSample> data;
    data.push_back({"a", CodeSet::from_indices({0})});
    data.push_back({"b", CodeSet::from_indices({1})});
    data.push_back({"c", CodeSet::from_indices({0, 1})});
    data.push_back({"d", CodeSet::from_indices({1})});
    PresenceMatrix x = build_presence(data, 5);  // columns 2..4 never fire
    LogisticModel model = fit_logistic(x, {1, 0, 1, 0});
    CHECK(model.weights[2] == 0.0);
    CHECK(model.weights[3] == 0.0);
    CHECK(model.weights[4] == 0.0);
}

TEST_CASE("probability outputs are calibrated to the decision rule") {
    std::vector<CodedSample> data;
    data.push_back({"a", CodeSet::from_indices({0})});
    data.push_back({"b", CodeSet::from_indices({1})});
    PresenceMatrix x = build_presence(data, 2);
    LogisticModel model = fit_logistic(x, {1, 0});
    double p0 = model.predict_proba(x.row(0));
    double p1 = model.predict_proba(x.row(1));
    CHECK(p0 > 0.5);
    CHECK(p1 < 0.5);
    CHECK(p0 <= 1.0);
    CHECK(p1 >= 0.0);
}

TEST_CASE("cross validation nails a separable attribute") {
    Rng data_rng(67);
    std::vector<CodedSample> data = random_dataset(data_rng, 300, 12, 4);
    PresenceMatrix x = build_presence(data, 12);
    std::vector<int> y = presence_labels(data, 7);

    Rng cv_rng(5);
    ProbeResult r = cross_validate(x, y, 5, cv_rng);
    CHECK(r.folds == 5);
    CHECK_FALSE(r.degenerate);
    CHECK(r.cv_accuracy_mean >= 0.99);
    CHECK(r.cv_accuracy_std >= 0.0);
    CHECK(r.baseline_accuracy <= 1.0);
    CHECK(r.cv_accuracy_mean >= r.baseline_accuracy - 2.0 * r.cv_accuracy_std);
}

TEST_CASE("cross validation on constant labels is flagged degenerate") {
    Rng data_rng(71);
    std::vector<CodedSample> data = random_dataset(data_rng, 40, 8, 3);
    PresenceMatrix x = build_presence(data, 8);
    std::vector<int> y(40, 1);

    Rng cv_rng(6);
    ProbeResult r = cross_validate(x, y, 5, cv_rng);
    CHECK(r.degenerate);
    CHECK(r.baseline_accuracy == 1.0);
    CHECK(r.cv_accuracy_mean == 1.0);
}

TEST_CASE("random labels sit near the majority baseline") {
    Rng data_rng(83);
    std::vector<CodedSample> data = random_dataset(data_rng, 1000, 16, 5);
    PresenceMatrix x = build_presence(data, 16);

    Rng label_rng(91);
    std::vector<int> y;
    for (std::size_t i = 0; i < 1000; ++i) y.push_back(label_rng.next_below(2) ? 1 : 0);

    Rng cv_rng(7);
    ProbeResult r = cross_validate(x, y, 5, cv_rng);
    CHECK(std::abs(r.baseline_accuracy - 0.5) < 0.05);
    // labels carry no signal: probe cannot beat chance by much
    double sigma = std::max(r.cv_accuracy_std, 1e-3);
    CHECK(std::abs(r.cv_accuracy_mean - r.baseline_accuracy) <= 3.0 * sigma + 0.05);
}

TEST_CASE("an attribute of two code presences stays above baseline") {
    Rng data_rng(97);
    std::vector<CodedSample> data = random_dataset(data_rng, 400, 10, 4);
    PresenceMatrix x = build_presence(data, 10);
    std::vector<int> y;
    for (const CodedSample& s : data) {
        y.push_back((s.codes.contains(2) && s.codes.contains(5)) ? 1 : 0);
    }
    REQUIRE(std::count(y.begin(), y.end(), 1) >= 5);

    Rng cv_rng(8);
    ProbeResult r = cross_validate(x, y, 5, cv_rng);
    CHECK(r.cv_accuracy_mean >= r.baseline_accuracy - 2.0 * r.cv_accuracy_std);
}

TEST_CASE("cross validation pre-condition checks") {
    Rng data_rng(101);
    std::vector<CodedSample> data = random_dataset(data_rng, 3, 6, 2);
    PresenceMatrix x = build_presence(data, 6);
    std::vector<int> y = {0, 1, 1};
    Rng cv_rng(9);
    CHECK_THROWS_AS(cross_validate(x, y, 1, cv_rng), std::invalid_argument);
    CHECK_THROWS_AS(cross_validate(x, y, 5, cv_rng), std::invalid_argument);
}

TEST_CASE("cross validation is deterministic for a fixed seed") {
    Rng data_rng(103);
    std::vector<CodedSample> data = random_dataset(data_rng, 120, 9, 3);
    PresenceMatrix x = build_presence(data, 9);
    std::vector<int> y = presence_labels(data, 1);

    Rng r1(77), r2(77);
    ProbeResult a = cross_validate(x, y, 4, r1);
    ProbeResult b = cross_validate(x, y, 4, r2);
    CHECK(a.cv_accuracy_mean == b.cv_accuracy_mean);
    CHECK(a.cv_accuracy_std == b.cv_accuracy_std);
    CHECK(a.baseline_accuracy == b.baseline_accuracy);
}
