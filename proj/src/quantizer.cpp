#include "pivq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pivq/assignment.hpp"

namespace pivq {

const char* to_string(QuantizeMethod m) {
    return m == QuantizeMethod::Nearest ? "nearest" : "matching";
}

QuantizeMethod quantize_method_from_string(const std::string& name) {
    if (name == "nearest") return QuantizeMethod::Nearest;
    if (name == "matching") return QuantizeMethod::Matching;
    throw std::invalid_argument("unknown quantization method: " + name);
}

DistanceMatrix distance_matrix(const Codebook& cb, const std::vector<Embedding>& embeddings) {
    cb.validate();
    DistanceMatrix d;
    d.rows = cb.size();
    d.cols = embeddings.size();
    d.values.resize(d.rows * d.cols);
    for (std::size_t j = 0; j < d.cols; ++j) {
        if (embeddings[j].size() != cb.dim) {
            throw std::invalid_argument("distance_matrix: embedding dimension " +
                                        std::to_string(embeddings[j].size()) + " != codebook " +
                                        std::to_string(cb.dim));
        }
    }
    for (std::size_t i = 0; i < d.rows; ++i) {
        for (std::size_t j = 0; j < d.cols; ++j) {
            d.values[i * d.cols + j] = euclidean_distance(cb.entries[i], embeddings[j]);
        }
    }
    return d;
}

namespace {

QuantizationResult finish_result(const Codebook& cb, std::vector<std::uint32_t> indices,
                                 double total_distance) {
    QuantizationResult res;
    res.indices = std::move(indices);
    res.quantized.reserve(res.indices.size());
    for (std::uint32_t idx : res.indices) {
        res.quantized.push_back(cb.entries[idx]);
    }
    res.code_set = CodeSet::from_indices(res.indices);
    res.total_distance = total_distance;

    res.stats = UsageStats(cb.size());
    for (std::uint32_t idx : res.indices) {
        ++res.stats.histogram[idx];
    }
    res.stats.max_per_sample = res.per_image_usage();
    res.stats.samples_seen = 1;
    return res;
}

}  // namespace

QuantizationResult nearest_quantize(const Codebook& cb, const std::vector<Embedding>& embeddings) {
    const DistanceMatrix d = distance_matrix(cb, embeddings);
    std::vector<std::uint32_t> indices(embeddings.size());
    double total = 0.0;
    for (std::size_t j = 0; j < d.cols; ++j) {
        std::uint32_t best = 0;
        double best_dist = d.at(0, j);
        for (std::size_t i = 1; i < d.rows; ++i) {
            if (d.at(i, j) < best_dist) {  // strict: ties keep the lowest index
                best_dist = d.at(i, j);
                best = static_cast<std::uint32_t>(i);
            }
        }
        indices[j] = best;
        total += best_dist;
    }
    return finish_result(cb, std::move(indices), total);
}

QuantizationResult matching_quantize(const Codebook& cb, const std::vector<Embedding>& embeddings,
                                     bool squared_distances) {
    if (cb.size() < embeddings.size()) {
        throw std::invalid_argument(
            "matching_quantize: requires K >= L, got K=" + std::to_string(cb.size()) +
            ", L=" + std::to_string(embeddings.size()));
    }
    const DistanceMatrix d = distance_matrix(cb, embeddings);
    std::vector<double> costs = d.values;
    if (squared_distances) {
        for (double& c : costs) c = c * c;
    }
    const Assignment a = solve_assignment(CostMatrix(d.rows, d.cols, std::move(costs)));

    double total = 0.0;
    for (std::size_t j = 0; j < a.mapping.size(); ++j) {
        total += d.at(a.mapping[j], j);
    }
    return finish_result(cb, a.mapping, total);
}

Embedding straight_through(const Embedding& encoder_out, const Embedding& quantized) {
    if (encoder_out.size() != quantized.size()) {
        throw std::invalid_argument("straight_through: dimension mismatch");
    }
    return quantized;
}

Embedding straight_through_grad(const Embedding& downstream_grad) {
    return downstream_grad;
}

UsageStats accumulate_usage(UsageStats stats, const QuantizationResult& result) {
    for (std::uint32_t idx : result.indices) {
        if (idx >= stats.histogram.size()) {
            throw std::out_of_range("accumulate_usage: code index " + std::to_string(idx) +
                                    " out of range for K=" + std::to_string(stats.histogram.size()));
        }
    }
    for (std::uint32_t idx : result.indices) {
        ++stats.histogram[idx];
    }
    stats.max_per_sample = std::max(stats.max_per_sample, result.per_image_usage());
    ++stats.samples_seen;
    return stats;
}

}  // namespace pivq
