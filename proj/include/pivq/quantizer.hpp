// Nearest-neighbour and matching quantization, straight-through value
// semantics and usage accounting.
#pragma once

#include <cstdint>
#include <vector>

#include "pivq/core.hpp"

namespace pivq {

enum class QuantizeMethod { Nearest, Matching };

const char* to_string(QuantizeMethod m);
QuantizeMethod quantize_method_from_string(const std::string& name);

/// Result of quantizing one sample's L embeddings.
struct QuantizationResult {
    std::vector<std::uint32_t> indices;  // per embedding, input order
    std::vector<Embedding> quantized;    // selected codebook entries
    CodeSet code_set;                    // deduplicated indices
    UsageStats stats;                    // this sample only
    double total_distance = 0.0;         // sum of selected distances

    /// K_img: distinct codes used by this sample.
    std::uint32_t per_image_usage() const {
        return static_cast<std::uint32_t>(code_set.size());
    }
};

/// K x L matrix with entry (i, j) = ||codebook[i] - embeddings[j]||_2.
DistanceMatrix distance_matrix(const Codebook& cb, const std::vector<Embedding>& embeddings);

/// Independent per-embedding quantization to the closest codebook entry;
/// repeats allowed. Equidistant entries resolve to the lowest index.
QuantizationResult nearest_quantize(const Codebook& cb, const std::vector<Embedding>& embeddings);

/// Minimal-cost one-to-one matching between the embeddings and the
/// codebook; all L indices are distinct, so |code_set| == L. Requires
/// K >= L. With `squared_distances` the assignment minimizes summed
/// squared distances instead (changes the optimum in general; off by
/// default).
QuantizationResult matching_quantize(const Codebook& cb, const std::vector<Embedding>& embeddings,
                                     bool squared_distances = false);

/// Forward value of the straight-through estimator: the quantized vector.
Embedding straight_through(const Embedding& encoder_out, const Embedding& quantized);

/// Backward rule of the straight-through estimator: the downstream
/// gradient is handed to the encoder output unchanged; the quantization
/// choice contributes nothing.
Embedding straight_through_grad(const Embedding& downstream_grad);

/// Folds one sample's quantization into running dataset statistics.
/// Histogram counts every index occurrence; throws if an index is out of
/// range for `stats.histogram`.
UsageStats accumulate_usage(UsageStats stats, const QuantizationResult& result);

}  // namespace pivq
