#include "pivq/probing.hpp"

#include <cmath>
#include <stdexcept>

namespace pivq {
namespace {

// Numerically stable logistic function.
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

PresenceMatrix select_rows(const PresenceMatrix& x, const std::vector<std::size_t>& rows) {
    PresenceMatrix sub;
    sub.rows = rows.size();
    sub.cols = x.cols;
    sub.values.reserve(rows.size() * x.cols);
    for (std::size_t r : rows)
        sub.values.insert(sub.values.end(), x.values.begin() + r * x.cols,
                          x.values.begin() + (r + 1) * x.cols);
    return sub;
}

template <typename T>
std::vector<T> select(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

}  // namespace

std::vector<double> PresenceMatrix::row(std::size_t r) const {
    std::vector<double> out(cols);
    for (std::size_t c = 0; c < cols; ++c) out[c] = values[r * cols + c];
    return out;
}

double LogisticModel::predict_proba(const std::vector<double>& x) const {
    double z = bias;
    for (std::size_t c = 0; c < weights.size(); ++c) z += weights[c] * x[c];
    return sigmoid(z);
}

PresenceMatrix build_presence(const std::vector<CodedSample>& dataset, std::uint32_t k) {
    PresenceMatrix m;
    m.rows = dataset.size();
    m.cols = k;
    m.values.assign(m.rows * m.cols, 0);
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::uint32_t code : dataset[r].codes.codes()) {
            if (code >= k)
                throw std::out_of_range("build_presence: code " + std::to_string(code) +
                                        " out of range for K=" + std::to_string(k));
            m.values[r * m.cols + code] = 1;
        }
    }
    return m;
}

LogisticModel fit_logistic(const PresenceMatrix& x, const std::vector<int>& y,
                           const LogisticHyper& hyper) {
    if (x.rows != y.size()) throw std::invalid_argument("fit_logistic: row/label count mismatch");
    if (x.rows < 2) throw std::invalid_argument("fit_logistic: need at least 2 samples");
    for (int label : y)
        if (label != 0 && label != 1)
            throw std::invalid_argument("fit_logistic: labels must be 0/1");

    LogisticModel model;
    model.weights.assign(x.cols, 0.0);

    std::size_t positives = 0;
    for (int label : y) positives += static_cast<std::size_t>(label);
    if (positives == 0 || positives == y.size()) {
        // Single class: constant predictor, flagged.
        model.degenerate = true;
        model.bias = positives == 0 ? -25.0 : 25.0;
        return model;
    }

    const double inv_n = 1.0 / static_cast<double>(x.rows);
    std::vector<double> grad(x.cols);
    for (std::uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            double z = model.bias;
            for (std::size_t c = 0; c < x.cols; ++c)
                if (x.at(r, c)) z += model.weights[c];
            const double err = sigmoid(z) - static_cast<double>(y[r]);
            for (std::size_t c = 0; c < x.cols; ++c)
                if (x.at(r, c)) grad[c] += err;
            grad_b += err;
        }
        for (std::size_t c = 0; c < x.cols; ++c)
            model.weights[c] -= hyper.lr * (grad[c] * inv_n + hyper.l2 * model.weights[c]);
        model.bias -= hyper.lr * grad_b * inv_n;  // bias stays unregularized
    }
    return model;
}

double accuracy(const LogisticModel& model, const PresenceMatrix& x, const std::vector<int>& y,
                const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("accuracy: empty evaluation set");
    std::size_t hits = 0;
    for (std::size_t r : rows)
        if (model.predict(x.row(r)) == y[r]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

ProbeResult cross_validate(const PresenceMatrix& x, const std::vector<int>& y,
                           std::uint32_t folds, Rng& rng, const LogisticHyper& hyper) {
    if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
    if (x.rows != y.size()) throw std::invalid_argument("cross_validate: row/label count mismatch");
    if (x.rows < folds) throw std::invalid_argument("cross_validate: fewer samples than folds");

    // Stratified split: shuffle within each class, deal round-robin.
    std::vector<std::size_t> class_idx[2];
    for (std::size_t r = 0; r < y.size(); ++r) class_idx[y[r] == 1 ? 1 : 0].push_back(r);
    std::vector<std::vector<std::size_t>> fold_rows(folds);
    for (auto& idx : class_idx) {
        rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k) fold_rows[k % folds].push_back(idx[k]);
    }

    ProbeResult result;
    result.folds = folds;
    std::vector<double> fold_acc;
    double baseline_sum = 0.0;
    for (std::uint32_t f = 0; f < folds; ++f) {
        if (fold_rows[f].empty())
            throw std::invalid_argument("cross_validate: empty fold; too few samples");
        std::vector<std::size_t> train_rows;
        for (std::uint32_t g = 0; g < folds; ++g)
            if (g != f) train_rows.insert(train_rows.end(), fold_rows[g].begin(), fold_rows[g].end());

        const LogisticModel model =
            fit_logistic(select_rows(x, train_rows), select(y, train_rows), hyper);
        result.degenerate = result.degenerate || model.degenerate;

        std::size_t train_pos = 0;
        for (std::size_t r : train_rows) train_pos += static_cast<std::size_t>(y[r]);
        const int majority = 2 * train_pos >= train_rows.size() ? 1 : 0;

        std::size_t hits = 0, base_hits = 0;
        for (std::size_t r : fold_rows[f]) {
            if (model.predict(x.row(r)) == y[r]) ++hits;
            if (majority == y[r]) ++base_hits;
        }
        fold_acc.push_back(static_cast<double>(hits) / static_cast<double>(fold_rows[f].size()));
        baseline_sum += static_cast<double>(base_hits) / static_cast<double>(fold_rows[f].size());
    }

    double mean = 0.0;
    for (double a : fold_acc) mean += a;
    mean /= static_cast<double>(fold_acc.size());
    double var = 0.0;
    for (double a : fold_acc) var += (a - mean) * (a - mean);
    var /= static_cast<double>(fold_acc.size());
    result.cv_accuracy_mean = mean;
    result.cv_accuracy_std = std::sqrt(var);
    result.baseline_accuracy = baseline_sum / static_cast<double>(folds);
    return result;
}

}  // namespace pivq
