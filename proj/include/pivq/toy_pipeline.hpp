// Desk-scale permutation-invariant autoencoder over synthetic factor images:
// two-layer encoder, matching quantizer with straight-through gradients,
// order-independent sum-pooling decoder, manual backprop throughout.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pivq/codebook_train.hpp"
#include "pivq/core.hpp"
#include "pivq/quantizer.hpp"

namespace pivq {

/// Synthetic images: 8x8 grid, 4 factors with 4 values each. Every
/// (factor, value) pair lights a fixed 2x2 block, so images are additive
/// compositions of their factor templates.
inline constexpr std::uint32_t kToyGrid = 8;
inline constexpr std::uint32_t kToyFactors = 4;
inline constexpr std::uint32_t kToyValues = 4;
inline constexpr double kToyNoise = 0.01;  // per-pixel noise bound

struct SyntheticSample {
    std::vector<double> image;   // kToyGrid^2 pixels, row-major, in [0,1]
    std::vector<int> factors;    // kToyFactors entries in [0, kToyValues)
};

/// Additive template for one (factor, value): the lit 2x2 block.
std::vector<double> factor_template(std::uint32_t factor, std::uint32_t value);

/// Stratified generation: factor combinations cycle exhaustively (so any
/// count >= 256 covers the full 4^4 space), order shuffled, noise seeded.
std::vector<SyntheticSample> generate_dataset(std::size_t count, Rng& rng);

struct ToyConfig {
    std::uint32_t hidden = 64;      // encoder hidden width
    std::uint32_t dec_hidden = 64;  // decoder hidden width
    std::uint32_t d = 16;           // embedding dimension
    std::uint32_t L = 8;            // codes per image
    std::uint32_t K = 64;           // codebook size
    std::uint64_t T_q = 1000;       // quantization onset
    std::uint64_t W = 500;          // re-init window, iterations
    std::uint32_t reinit_count = 3;
    double learning_rate = 0.1;
    double commitment_beta = 0.25;
    std::uint64_t steps = 20000;
    std::uint32_t batch_size = 4;
    std::uint32_t train_count = 512;   // training pool
    std::uint32_t holdout_count = 64;  // held-out evaluation pool
    std::uint64_t seed = 0;

    void validate() const;
};

/// All learnable weights except the codebook, flattened row-major.
struct ToyParams {
    std::vector<double> w1, b1;  // input -> hidden
    std::vector<double> w2, b2;  // hidden -> L*d embedding heads
    std::vector<double> w3, b3;  // pooled d -> dec_hidden
    std::vector<double> w4, b4;  // dec_hidden -> image
};

struct ToyModel {
    ToyConfig cfg;
    ToyParams params;
    Codebook codebook;
};

/// Parameter-shaped gradient accumulator; codebook entries included.
struct ToyGradients {
    ToyParams params;
    std::vector<Embedding> codebook;
};

struct ForwardCache {
    std::vector<double> x;        // input image
    std::vector<double> h;        // encoder hidden activations (post-tanh)
    std::vector<Embedding> z_e;   // L encoder outputs
    bool quantized = false;
    std::vector<std::uint32_t> indices;  // per-head assigned codes
    std::vector<Embedding> z_q;   // decoder inputs (== z_e when not quantized)
    std::vector<double> pooled;   // order-independent sum over z_q
    std::vector<double> g;        // decoder hidden activations (post-tanh)
    std::vector<double> recon;
};

struct ToyForward {
    std::vector<double> recon;
    QuantizationResult quantization;  // empty when quantize == false
    ForwardCache cache;
};

ToyModel init_toy_model(const ToyConfig& cfg, Rng& rng);

/// Runs the pipeline; with quantize == false embeddings pass straight to
/// the decoder (the pre-T_q regime).
ToyForward toy_forward(const ToyModel& model, const std::vector<double>& image, bool quantize);

/// Reconstruction from a bare CodeSet: sum the named entries in ascending
/// code order and decode.
std::vector<double> decode_codes(const ToyModel& model, const CodeSet& codes);

ToyGradients zero_gradients(const ToyModel& model);

/// Backpropagates grad_out (dLoss/drecon) through decoder, pooling, the
/// straight-through copy, and encoder. Linear in grad_out; the quantizer's
/// assignment and the codebook entries receive no gradient here.
ToyGradients toy_backward(const ToyModel& model, const ForwardCache& cache,
                          const std::vector<double>& grad_out);

/// Gradients of the VQ terms: codebook loss ||sg(z_e) - e||^2 (codebook
/// entries) and commitment beta*||z_e - sg(e)||^2 (encoder parameters,
/// routed through the encoder). Requires a quantized cache.
ToyGradients vq_gradients(const ToyModel& model, const ForwardCache& cache, double beta);

void add_gradients(ToyGradients& into, const ToyGradients& other, double scale = 1.0);
void apply_sgd(ToyModel& model, const ToyGradients& grads, double lr);

/// Mean |recon - x| over pixels and its gradient.
double l1_loss(const std::vector<double>& recon, const std::vector<double>& target,
               std::vector<double>* grad_out = nullptr);
double mse(const std::vector<double>& recon, const std::vector<double>& target);

struct ToyLossRecord {
    std::uint64_t step;
    double recon_l1;
    double codebook_loss;
    double commitment_loss;
};

struct ToyMetrics {
    double initial_holdout_mse = 0.0;
    double final_holdout_mse = 0.0;
    std::vector<ToyLossRecord> loss_history;
    UsageStats usage;
};

struct ToyRunResult {
    ToyModel model;
    ToyMetrics metrics;
};

/// Mean squared reconstruction error over a dataset.
double holdout_mse(const ToyModel& model, const std::vector<SyntheticSample>& data, bool quantize);

/// Full training run on the synthetic dataset with the delayed-init
/// schedule: pass-through before T_q, codebook re-inits at T_q + m*W,
/// straight-through updates with L1 + VQ losses afterwards.
ToyRunResult train_toy(const ToyConfig& cfg);

void save_toy_model(std::ostream& out, const ToyModel& model);
ToyModel load_toy_model(std::istream& in);
void save_toy_model(const std::string& path, const ToyModel& model);
ToyModel load_toy_model(const std::string& path);

}  // namespace pivq
