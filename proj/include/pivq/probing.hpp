// Linear probing of discrete codes: binary presence features, logistic
// regression per attribute, stratified cross-validation against a
// majority-class baseline.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pivq/core.hpp"
#include "pivq/io.hpp"

namespace pivq {

/// Samples-by-codes 0/1 indicator matrix.
struct PresenceMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> values;  // row-major

    std::uint8_t at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::vector<double> row(std::size_t r) const;
};

struct LogisticHyper {
    double l2 = 1e-2;
    std::uint32_t epochs = 500;
    double lr = 0.5;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    bool degenerate = false;  // trained on single-class labels

    /// P(y=1 | x).
    double predict_proba(const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
};

struct ProbeResult {
    std::string attribute;
    double cv_accuracy_mean = 0.0;
    double cv_accuracy_std = 0.0;
    double baseline_accuracy = 0.0;
    std::uint32_t folds = 0;
    bool degenerate = false;
};

PresenceMatrix build_presence(const std::vector<CodedSample>& dataset, std::uint32_t k);

LogisticModel fit_logistic(const PresenceMatrix& x, const std::vector<int>& y,
                           const LogisticHyper& hyper = {});

double accuracy(const LogisticModel& model, const PresenceMatrix& x, const std::vector<int>& y,
                const std::vector<std::size_t>& rows);

/// Stratified k-fold CV; baseline predicts each training fold's majority
/// label on the same held-out rows.
ProbeResult cross_validate(const PresenceMatrix& x, const std::vector<int>& y,
                           std::uint32_t folds, Rng& rng, const LogisticHyper& hyper = {});

}  // namespace pivq
