// Streaming codebook learning with delayed data-dependent initialization:
// pass-through before iteration T_q, KMeans++ (re)initialization over a
// rolling window, then plain gradient descent on the VQ codebook loss.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pivq/core.hpp"
#include "pivq/quantizer.hpp"

namespace pivq {

/// Hyperparameters. Field names double as the JSON config keys.
struct TrainerConfig {
    std::uint32_t K = 64;             // codebook size
    std::uint32_t d = 2;              // embedding dimension
    std::uint32_t L = 4;              // codes per sample
    std::uint64_t T_q = 100;          // iteration at which quantization begins
    std::uint64_t W = 50;             // rolling-window length, iterations
    std::uint32_t reinit_count = 3;   // successive windows that re-initialize
    double learning_rate = 0.05;
    double commitment_beta = 0.25;
    QuantizeMethod method = QuantizeMethod::Matching;
    std::uint64_t seed = 0;
    std::uint32_t lloyd_iters = 10;   // refinement steps after KMeans++ seeding

    void validate() const;
};

/// One sample's L encoder outputs.
using SampleEmbeddings = std::vector<Embedding>;
/// One training iteration's batch of samples.
using Batch = std::vector<SampleEmbeddings>;

/// Ring buffer over the most recent W iterations' embeddings.
class WindowBuffer {
public:
    explicit WindowBuffer(std::size_t window_iterations);

    void push(const Batch& batch);
    std::size_t iterations_held() const { return slots_.size(); }

    /// All embeddings currently in the window, oldest first.
    std::vector<Embedding> flatten() const;

private:
    std::size_t capacity_;
    std::vector<std::vector<Embedding>> slots_;  // one per iteration
    std::size_t next_ = 0;
    bool full_ = false;
};

struct LossRecord {
    std::uint64_t iteration;
    double codebook_loss;
    double commitment_loss;
};

struct TrainState {
    Codebook codebook;
    std::uint64_t iteration = 0;
    UsageStats usage;
    std::vector<LossRecord> loss_history;
    WindowBuffer window;
    Rng rng;

    TrainState(const TrainerConfig& cfg);
};

/// Mean squared distance of each sample to its nearest centroid.
double mean_distortion(const Codebook& cb, const std::vector<Embedding>& samples);

/// KMeans++ seeding (first centroid uniform, the rest proportional to the
/// squared distance to the nearest chosen centroid) followed by
/// `lloyd_iters` refinement passes. With fewer samples than centroids,
/// seeds repeat and duplicates are perturbed by 1e-6 noise.
Codebook kmeanspp_init(const std::vector<Embedding>& samples, std::uint32_t k, Rng& rng,
                       std::uint32_t lloyd_iters = 10);

/// Advances one iteration. Before T_q the batch only feeds the window; at
/// iterations T_q + m*W (m < reinit_count) the codebook is re-initialized
/// from the window; otherwise the batch is quantized and the codebook
/// updated by gradient descent on ||sg(z_e) - e||^2, with the commitment
/// loss beta*||z_e - sg(e)||^2 recorded.
void train_step(TrainState& state, const Batch& batch, const TrainerConfig& cfg);

/// Pulls batches from `stream` until it is exhausted.
TrainState run_training(const std::function<std::optional<Batch>()>& stream,
                        const TrainerConfig& cfg);

struct SyntheticGaussianStream;

/// Mixture of 16 isotropic Gaussians (sigma = 0.05) with means on a 4 x 4
/// unit grid; the standard synthetic benchmark stream.
struct SyntheticGaussianStream {
    SyntheticGaussianStream(const TrainerConfig& cfg, std::uint64_t iterations,
                            std::uint32_t batch_size);

    std::optional<Batch> operator()();

    std::vector<Embedding> component_means() const { return means_; }

private:
    std::vector<Embedding> means_;
    std::uint32_t dim_;
    std::uint32_t codes_per_sample_;
    std::uint32_t batch_size_;
    std::uint64_t remaining_;
    Rng rng_;
};

}  // namespace pivq
