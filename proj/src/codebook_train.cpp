#include "pivq/codebook_train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pivq {
namespace {

double squared_distance(const Embedding& a, const Embedding& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

double nearest_squared(const Codebook& cb, const Embedding& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& entry : cb.entries) best = std::min(best, squared_distance(entry, x));
    return best;
}

// Index of x's nearest centroid, lowest index on ties.
std::size_t nearest_index(const std::vector<Embedding>& centroids, const Embedding& x) {
    std::size_t best = 0;
    double best_d = squared_distance(centroids[0], x);
    for (std::size_t i = 1; i < centroids.size(); ++i) {
        const double d = squared_distance(centroids[i], x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// Weighted draw proportional to `weights`; caller guarantees a positive total.
std::size_t weighted_pick(const std::vector<double>& weights, double total, Rng& rng) {
    const double r = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return i;
    }
    return weights.size() - 1;  // r landed on the rounding slack at the top
}

}  // namespace

void TrainerConfig::validate() const {
    if (K == 0) throw std::invalid_argument("trainer: K must be positive");
    if (d == 0) throw std::invalid_argument("trainer: d must be positive");
    if (L == 0) throw std::invalid_argument("trainer: L must be positive");
    if (method == QuantizeMethod::Matching && L > K)
        throw std::invalid_argument("trainer: matching method needs L <= K");
    if (W < 1) throw std::invalid_argument("trainer: W must be >= 1");
    if (T_q < W) throw std::invalid_argument("trainer: T_q must be >= W");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("trainer: learning_rate must be > 0");
    if (!(commitment_beta > 0.0)) throw std::invalid_argument("trainer: commitment_beta must be > 0");
}

WindowBuffer::WindowBuffer(std::size_t window_iterations) : capacity_(window_iterations) {
    if (capacity_ == 0) throw std::invalid_argument("window: capacity must be >= 1");
}

void WindowBuffer::push(const Batch& batch) {
    std::vector<Embedding> flat;
    for (const auto& sample : batch)
        for (const auto& e : sample) flat.push_back(e);
    if (full_) {
        slots_[next_] = std::move(flat);
    } else {
        slots_.push_back(std::move(flat));
    }
    next_ = (next_ + 1) % capacity_;
    if (!full_ && slots_.size() == capacity_) full_ = true;
}

std::vector<Embedding> WindowBuffer::flatten() const {
    std::vector<Embedding> out;
    // Oldest first: once full, the slot about to be overwritten is the oldest.
    const std::size_t n = slots_.size();
    const std::size_t start = full_ ? next_ : 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& slot = slots_[(start + k) % n];
        out.insert(out.end(), slot.begin(), slot.end());
    }
    return out;
}

TrainState::TrainState(const TrainerConfig& cfg)
    : window(cfg.W), rng(Rng(cfg.seed)) {
    cfg.validate();
    codebook.dim = cfg.d;
    codebook.entries.assign(cfg.K, Embedding(cfg.d, 0.0));
    usage.histogram.assign(cfg.K, 0);
}

double mean_distortion(const Codebook& cb, const std::vector<Embedding>& samples) {
    if (samples.empty()) throw std::invalid_argument("distortion: empty sample set");
    double total = 0.0;
    for (const auto& x : samples) total += nearest_squared(cb, x);
    return total / static_cast<double>(samples.size());
}

Codebook kmeanspp_init(const std::vector<Embedding>& samples, std::uint32_t k, Rng& rng,
                       std::uint32_t lloyd_iters) {
    if (samples.empty()) throw std::invalid_argument("kmeanspp: empty sample set");
    if (k == 0) throw std::invalid_argument("kmeanspp: K must be positive");
    const std::size_t dim = samples[0].size();
    for (const auto& s : samples)
        if (s.size() != dim) throw std::invalid_argument("kmeanspp: inconsistent dimensions");

    std::vector<Embedding> centroids;
    centroids.reserve(k);
    centroids.push_back(samples[rng.next_below(samples.size())]);

    // D^2 weights toward the nearest already-chosen centroid.
    std::vector<double> weight(samples.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double best = squared_distance(centroids[0], samples[i]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, squared_distance(centroids[c], samples[i]));
            weight[i] = best;
            total += best;
        }
        if (total > 0.0) {
            centroids.push_back(samples[weighted_pick(weight, total, rng)]);
        } else {
            // Every point already covered; further seeds repeat uniformly.
            centroids.push_back(samples[rng.next_below(samples.size())]);
        }
    }

    // With fewer samples than centroids the seeds necessarily repeat; nudge
    // the copies apart so no two entries start identical.
    if (samples.size() < k) {
        for (std::size_t i = 1; i < centroids.size(); ++i) {
            bool dup = false;
            for (std::size_t j = 0; j < i && !dup; ++j) dup = (centroids[i] == centroids[j]);
            if (dup)
                for (auto& v : centroids[i]) v += 1e-6 * rng.next_normal();
        }
    }

    // Lloyd refinement; a cluster that loses all members keeps its centroid.
    std::vector<std::size_t> assign(samples.size());
    for (std::uint32_t iter = 0; iter < lloyd_iters; ++iter) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            assign[i] = nearest_index(centroids, samples[i]);
        std::vector<Embedding> sums(k, Embedding(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t c = 0; c < dim; ++c) sums[assign[i]][c] += samples[i][c];
            ++counts[assign[i]];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            for (std::size_t c = 0; c < dim; ++c)
                centroids[j][c] = sums[j][c] / static_cast<double>(counts[j]);
        }
    }

    Codebook cb;
    cb.dim = dim;
    cb.entries = std::move(centroids);
    cb.validate();
    return cb;
}

void train_step(TrainState& state, const Batch& batch, const TrainerConfig& cfg) {
    cfg.validate();
    for (const auto& sample : batch) {
        if (sample.size() != cfg.L)
            throw std::invalid_argument("train_step: sample must hold exactly L embeddings");
        for (const auto& e : sample)
            if (e.size() != cfg.d)
                throw std::invalid_argument("train_step: embedding dimension mismatch");
    }

    const std::uint64_t it = state.iteration;
    state.window.push(batch);

    if (it < cfg.T_q) {
        // Pass-through phase: the window fills, the codebook stays put.
        ++state.iteration;
        return;
    }

    const std::uint64_t since = it - cfg.T_q;
    const bool reinit = (since % cfg.W == 0) && (since / cfg.W < cfg.reinit_count);
    if (reinit) {
        state.codebook = kmeanspp_init(state.window.flatten(), cfg.K, state.rng, cfg.lloyd_iters);
        ++state.iteration;
        return;
    }

    // Quantize, track usage, and step the codebook against the batch.
    std::vector<Embedding> grads(cfg.K, Embedding(cfg.d, 0.0));
    double loss = 0.0;
    std::size_t n_embeddings = 0;
    for (const auto& sample : batch) {
        QuantizationResult qr = cfg.method == QuantizeMethod::Matching
                                    ? matching_quantize(state.codebook, sample)
                                    : nearest_quantize(state.codebook, sample);
        state.usage = accumulate_usage(std::move(state.usage), qr);
        for (std::size_t j = 0; j < sample.size(); ++j) {
            const auto& e = state.codebook.entries[qr.indices[j]];
            loss += squared_distance(sample[j], e);
            for (std::size_t c = 0; c < cfg.d; ++c)
                grads[qr.indices[j]][c] += 2.0 * (e[c] - sample[j][c]);
            ++n_embeddings;
        }
    }
    if (n_embeddings > 0) {
        const double scale = 1.0 / static_cast<double>(n_embeddings);
        for (std::size_t j = 0; j < cfg.K; ++j)
            for (std::size_t c = 0; c < cfg.d; ++c)
                state.codebook.entries[j][c] -= cfg.learning_rate * scale * grads[j][c];
        const double mean_loss = loss * scale;
        state.loss_history.push_back({it, mean_loss, cfg.commitment_beta * mean_loss});
    }
    ++state.iteration;
}

TrainState run_training(const std::function<std::optional<Batch>()>& stream,
                        const TrainerConfig& cfg) {
    TrainState state(cfg);
    while (auto batch = stream()) train_step(state, *batch, cfg);
    return state;
}

SyntheticGaussianStream::SyntheticGaussianStream(const TrainerConfig& cfg,
                                                 std::uint64_t iterations,
                                                 std::uint32_t batch_size)
    : dim_(cfg.d),
      codes_per_sample_(cfg.L),
      batch_size_(batch_size),
      remaining_(iterations),
      rng_(Rng(cfg.seed).split(0x67313661)) {
    if (cfg.d != 2) throw std::invalid_argument("gauss16 stream: requires d == 2");
    if (batch_size == 0) throw std::invalid_argument("gauss16 stream: batch size must be positive");
    for (int gy = 0; gy < 4; ++gy)
        for (int gx = 0; gx < 4; ++gx)
            means_.push_back({gx / 3.0, gy / 3.0});
}

std::optional<Batch> SyntheticGaussianStream::operator()() {
    if (remaining_ == 0) return std::nullopt;
    --remaining_;
    constexpr double kSigma = 0.05;
    Batch batch(batch_size_);
    for (auto& sample : batch) {
        sample.resize(codes_per_sample_);
        for (auto& e : sample) {
            const auto& mu = means_[rng_.next_below(means_.size())];
            e.resize(dim_);
            for (std::uint32_t c = 0; c < dim_; ++c)
                e[c] = mu[c] + kSigma * rng_.next_normal();
        }
    }
    return batch;
}

}  // namespace pivq
