#include "pivq/toy_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "pivq/io.hpp"

namespace pivq {
namespace {

constexpr std::uint32_t kPixels = kToyGrid * kToyGrid;
constexpr double kBlockIntensity = 0.24;
constexpr char kToyModelMagic[8] = {'P', 'I', 'V', 'Q', 'T', 'M', '1', '\0'};

std::size_t combo_count() {
    std::size_t n = 1;
    for (std::uint32_t f = 0; f < kToyFactors; ++f) n *= kToyValues;
    return n;
}

// y = tanh(W x + b), W row-major rows x cols.
void affine_tanh(const std::vector<double>& w, const std::vector<double>& b,
                 const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double z = b[i];
        for (std::size_t j = 0; j < cols; ++j) z += w[i * cols + j] * x[j];
        y[i] = std::tanh(z);
    }
}

void affine(const std::vector<double>& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double z = b[i];
        for (std::size_t j = 0; j < cols; ++j) z += w[i * cols + j] * x[j];
        y[i] = z;
    }
}

void init_layer(std::vector<double>& w, std::vector<double>& b, std::size_t rows,
                std::size_t cols, Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(cols));
    w.resize(rows * cols);
    for (auto& v : w) v = s * (2.0 * rng.next_double() - 1.0);
    b.assign(rows, 0.0);
}

// Backprop through the encoder given dLoss/dz_e; accumulates into grads.
void encoder_backward(const ToyModel& model, const ForwardCache& cache,
                      const std::vector<Embedding>& grad_ze, ToyGradients& grads) {
    const std::uint32_t H = model.cfg.hidden;
    const std::uint32_t d = model.cfg.d;
    std::vector<double> grad_h(H, 0.0);
    for (std::size_t l = 0; l < grad_ze.size(); ++l) {
        for (std::uint32_t c = 0; c < d; ++c) {
            const double gz = grad_ze[l][c];
            if (gz == 0.0) continue;
            const std::size_t row = l * d + c;
            for (std::uint32_t j = 0; j < H; ++j) {
                grads.params.w2[row * H + j] += gz * cache.h[j];
                grad_h[j] += model.params.w2[row * H + j] * gz;
            }
            grads.params.b2[row] += gz;
        }
    }
    for (std::uint32_t j = 0; j < H; ++j) {
        const double gpre = grad_h[j] * (1.0 - cache.h[j] * cache.h[j]);
        if (gpre == 0.0) continue;
        for (std::uint32_t i = 0; i < kPixels; ++i)
            grads.params.w1[j * kPixels + i] += gpre * cache.x[i];
        grads.params.b1[j] += gpre;
    }
}

std::vector<double> decode_pooled(const ToyModel& model, const std::vector<double>& pooled,
                                  std::vector<double>* g_out = nullptr) {
    std::vector<double> g, recon;
    affine_tanh(model.params.w3, model.params.b3, pooled, g);
    affine(model.params.w4, model.params.b4, g, recon);
    if (g_out) *g_out = std::move(g);
    return recon;
}

}  // namespace

std::vector<double> factor_template(std::uint32_t factor, std::uint32_t value) {
    if (factor >= kToyFactors || value >= kToyValues)
        throw std::invalid_argument("factor_template: factor/value out of range");
    std::vector<double> t(kPixels, 0.0);
    for (std::uint32_t dr = 0; dr < 2; ++dr)
        for (std::uint32_t dc = 0; dc < 2; ++dc)
            t[(2 * factor + dr) * kToyGrid + (2 * value + dc)] = kBlockIntensity;
    return t;
}

std::vector<SyntheticSample> generate_dataset(std::size_t count, Rng& rng) {
    const std::size_t combos = combo_count();
    std::vector<SyntheticSample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        SyntheticSample& s = out[i];
        s.factors.resize(kToyFactors);
        std::size_t combo = i % combos;  // exhaustive cycling covers the space
        s.image.assign(kPixels, 0.0);
        for (std::uint32_t f = 0; f < kToyFactors; ++f) {
            s.factors[f] = static_cast<int>(combo % kToyValues);
            combo /= kToyValues;
            const auto t = factor_template(f, static_cast<std::uint32_t>(s.factors[f]));
            for (std::uint32_t p = 0; p < kPixels; ++p) s.image[p] += t[p];
        }
        for (std::uint32_t p = 0; p < kPixels; ++p) s.image[p] += kToyNoise * rng.next_double();
    }
    rng.shuffle(out);
    return out;
}

void ToyConfig::validate() const {
    if (hidden == 0 || dec_hidden == 0 || d == 0 || L == 0 || K == 0)
        throw std::invalid_argument("toy config: zero-sized layer");
    if (L > K) throw std::invalid_argument("toy config: matching needs L <= K");
    if (W < 1 || T_q < W) throw std::invalid_argument("toy config: need T_q >= W >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("toy config: learning_rate must be > 0");
    if (!(commitment_beta > 0.0))
        throw std::invalid_argument("toy config: commitment_beta must be > 0");
    if (batch_size == 0) throw std::invalid_argument("toy config: batch_size must be > 0");
    if (train_count == 0 || holdout_count == 0)
        throw std::invalid_argument("toy config: empty dataset");
}

ToyModel init_toy_model(const ToyConfig& cfg, Rng& rng) {
    cfg.validate();
    ToyModel m;
    m.cfg = cfg;
    init_layer(m.params.w1, m.params.b1, cfg.hidden, kPixels, rng);
    init_layer(m.params.w2, m.params.b2, std::size_t{cfg.L} * cfg.d, cfg.hidden, rng);
    init_layer(m.params.w3, m.params.b3, cfg.dec_hidden, cfg.d, rng);
    init_layer(m.params.w4, m.params.b4, kPixels, cfg.dec_hidden, rng);
    m.codebook.dim = cfg.d;
    m.codebook.entries.assign(cfg.K, Embedding(cfg.d, 0.0));
    return m;
}

ToyForward toy_forward(const ToyModel& model, const std::vector<double>& image, bool quantize) {
    if (image.size() != kPixels)
        throw std::invalid_argument("toy_forward: image must have " + std::to_string(kPixels) +
                                    " pixels");
    ToyForward out;
    ForwardCache& c = out.cache;
    c.x = image;
    affine_tanh(model.params.w1, model.params.b1, c.x, c.h);

    const std::uint32_t d = model.cfg.d;
    c.z_e.resize(model.cfg.L);
    for (std::uint32_t l = 0; l < model.cfg.L; ++l) {
        c.z_e[l].resize(d);
        for (std::uint32_t cc = 0; cc < d; ++cc) {
            const std::size_t row = std::size_t{l} * d + cc;
            double z = model.params.b2[row];
            for (std::uint32_t j = 0; j < model.cfg.hidden; ++j)
                z += model.params.w2[row * model.cfg.hidden + j] * c.h[j];
            c.z_e[l][cc] = z;
        }
    }

    c.quantized = quantize;
    if (quantize) {
        out.quantization = matching_quantize(model.codebook, c.z_e);
        c.indices = out.quantization.indices;
        // Sum decoder inputs in ascending code order so reconstructions are
        // bit-identical under any permutation of the code list.
        std::vector<std::uint32_t> order = c.indices;
        std::sort(order.begin(), order.end());
        c.z_q.clear();
        for (std::uint32_t idx : order) c.z_q.push_back(model.codebook.entries[idx]);
    } else {
        c.z_q = c.z_e;
    }

    c.pooled.assign(d, 0.0);
    for (const auto& z : c.z_q)
        for (std::uint32_t cc = 0; cc < d; ++cc) c.pooled[cc] += z[cc];

    c.recon = decode_pooled(model, c.pooled, &c.g);
    out.recon = c.recon;
    return out;
}

std::vector<double> decode_codes(const ToyModel& model, const CodeSet& codes) {
    if (!codes.empty() && codes.max_code() >= model.codebook.entries.size())
        throw std::out_of_range("decode_codes: code out of codebook range");
    std::vector<double> pooled(model.cfg.d, 0.0);
    for (std::uint32_t idx : codes.codes())  // canonical ascending order
        for (std::uint32_t cc = 0; cc < model.cfg.d; ++cc)
            pooled[cc] += model.codebook.entries[idx][cc];
    return decode_pooled(model, pooled);
}

ToyGradients zero_gradients(const ToyModel& model) {
    ToyGradients g;
    g.params.w1.assign(model.params.w1.size(), 0.0);
    g.params.b1.assign(model.params.b1.size(), 0.0);
    g.params.w2.assign(model.params.w2.size(), 0.0);
    g.params.b2.assign(model.params.b2.size(), 0.0);
    g.params.w3.assign(model.params.w3.size(), 0.0);
    g.params.b3.assign(model.params.b3.size(), 0.0);
    g.params.w4.assign(model.params.w4.size(), 0.0);
    g.params.b4.assign(model.params.b4.size(), 0.0);
    g.codebook.assign(model.codebook.entries.size(), Embedding(model.cfg.d, 0.0));
    return g;
}

ToyGradients toy_backward(const ToyModel& model, const ForwardCache& cache,
                          const std::vector<double>& grad_out) {
    if (grad_out.size() != kPixels)
        throw std::invalid_argument("toy_backward: grad_out size mismatch");
    ToyGradients grads = zero_gradients(model);
    const std::uint32_t G = model.cfg.dec_hidden;
    const std::uint32_t d = model.cfg.d;

    std::vector<double> grad_g(G, 0.0);
    for (std::uint32_t i = 0; i < kPixels; ++i) {
        const double go = grad_out[i];
        if (go == 0.0) continue;
        for (std::uint32_t j = 0; j < G; ++j) {
            grads.params.w4[i * G + j] += go * cache.g[j];
            grad_g[j] += model.params.w4[i * G + j] * go;
        }
        grads.params.b4[i] += go;
    }

    std::vector<double> grad_pooled(d, 0.0);
    for (std::uint32_t j = 0; j < G; ++j) {
        const double gpre = grad_g[j] * (1.0 - cache.g[j] * cache.g[j]);
        if (gpre == 0.0) continue;
        for (std::uint32_t cc = 0; cc < d; ++cc) {
            grads.params.w3[j * d + cc] += gpre * cache.pooled[cc];
            grad_pooled[cc] += model.params.w3[j * d + cc] * gpre;
        }
        grads.params.b3[j] += gpre;
    }

    // Sum pooling fans the same gradient to every decoder input; the
    // straight-through copy carries it unchanged to each encoder output.
    std::vector<Embedding> grad_ze(model.cfg.L, straight_through_grad(grad_pooled));
    encoder_backward(model, cache, grad_ze, grads);
    return grads;
}

ToyGradients vq_gradients(const ToyModel& model, const ForwardCache& cache, double beta) {
    if (!cache.quantized) throw std::invalid_argument("vq_gradients: cache is not quantized");
    ToyGradients grads = zero_gradients(model);
    const std::uint32_t d = model.cfg.d;
    std::vector<Embedding> grad_ze(model.cfg.L, Embedding(d, 0.0));
    for (std::uint32_t l = 0; l < model.cfg.L; ++l) {
        const Embedding& e = model.codebook.entries[cache.indices[l]];
        for (std::uint32_t cc = 0; cc < d; ++cc) {
            const double diff = cache.z_e[l][cc] - e[cc];
            grads.codebook[cache.indices[l]][cc] += -2.0 * diff;   // d/de ||sg(z_e)-e||^2
            grad_ze[l][cc] = 2.0 * beta * diff;                    // d/dz_e beta*||z_e-sg(e)||^2
        }
    }
    encoder_backward(model, cache, grad_ze, grads);
    return grads;
}

namespace {

void axpy(std::vector<double>& into, const std::vector<double>& other, double scale) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += scale * other[i];
}

}  // namespace

void add_gradients(ToyGradients& into, const ToyGradients& other, double scale) {
    axpy(into.params.w1, other.params.w1, scale);
    axpy(into.params.b1, other.params.b1, scale);
    axpy(into.params.w2, other.params.w2, scale);
    axpy(into.params.b2, other.params.b2, scale);
    axpy(into.params.w3, other.params.w3, scale);
    axpy(into.params.b3, other.params.b3, scale);
    axpy(into.params.w4, other.params.w4, scale);
    axpy(into.params.b4, other.params.b4, scale);
    for (std::size_t k = 0; k < into.codebook.size(); ++k)
        axpy(into.codebook[k], other.codebook[k], scale);
}

void apply_sgd(ToyModel& model, const ToyGradients& grads, double lr) {
    axpy(model.params.w1, grads.params.w1, -lr);
    axpy(model.params.b1, grads.params.b1, -lr);
    axpy(model.params.w2, grads.params.w2, -lr);
    axpy(model.params.b2, grads.params.b2, -lr);
    axpy(model.params.w3, grads.params.w3, -lr);
    axpy(model.params.b3, grads.params.b3, -lr);
    axpy(model.params.w4, grads.params.w4, -lr);
    axpy(model.params.b4, grads.params.b4, -lr);
    for (std::size_t k = 0; k < model.codebook.entries.size(); ++k)
        axpy(model.codebook.entries[k], grads.codebook[k], -lr);
}

double l1_loss(const std::vector<double>& recon, const std::vector<double>& target,
               std::vector<double>* grad_out) {
    if (recon.size() != target.size()) throw std::invalid_argument("l1_loss: size mismatch");
    const double inv_n = 1.0 / static_cast<double>(recon.size());
    double loss = 0.0;
    if (grad_out) grad_out->assign(recon.size(), 0.0);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        const double diff = recon[i] - target[i];
        loss += std::abs(diff);
        if (grad_out && diff != 0.0) (*grad_out)[i] = (diff > 0.0 ? 1.0 : -1.0) * inv_n;
    }
    return loss * inv_n;
}

double mse(const std::vector<double>& recon, const std::vector<double>& target) {
    if (recon.size() != target.size()) throw std::invalid_argument("mse: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < recon.size(); ++i) {
        const double diff = recon[i] - target[i];
        s += diff * diff;
    }
    return s / static_cast<double>(recon.size());
}

double holdout_mse(const ToyModel& model, const std::vector<SyntheticSample>& data, bool quantize) {
    if (data.empty()) throw std::invalid_argument("holdout_mse: empty dataset");
    double total = 0.0;
    for (const auto& s : data) total += mse(toy_forward(model, s.image, quantize).recon, s.image);
    return total / static_cast<double>(data.size());
}

ToyRunResult train_toy(const ToyConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    Rng data_rng = root.split(0x64617461);   // training pool
    Rng hold_rng = root.split(0x686f6c64);   // held-out pool
    Rng init_rng = root.split(0x696e6974);   // weights
    Rng loop_rng = root.split(0x6c6f6f70);   // batch picks + kmeans

    const auto pool = generate_dataset(cfg.train_count, data_rng);
    const auto holdout = generate_dataset(cfg.holdout_count, hold_rng);

    ToyRunResult run;
    run.model = init_toy_model(cfg, init_rng);
    run.metrics.usage.histogram.assign(cfg.K, 0);
    run.metrics.initial_holdout_mse = holdout_mse(run.model, holdout, true);

    WindowBuffer window(cfg.W);
    const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
    const double inv_codes = 1.0 / static_cast<double>(cfg.batch_size * cfg.L);

    for (std::uint64_t step = 0; step < cfg.steps; ++step) {
        std::vector<const SyntheticSample*> batch(cfg.batch_size);
        for (auto& s : batch) s = &pool[loop_rng.next_below(pool.size())];

        const bool quantizing = step >= cfg.T_q;
        const std::uint64_t since = quantizing ? step - cfg.T_q : 0;
        const bool reinit = quantizing && since % cfg.W == 0 && since / cfg.W < cfg.reinit_count;

        if (reinit) {
            Batch embeddings(cfg.batch_size);
            for (std::size_t i = 0; i < batch.size(); ++i)
                embeddings[i] = toy_forward(run.model, batch[i]->image, false).cache.z_e;
            window.push(embeddings);
            run.model.codebook = kmeanspp_init(window.flatten(), cfg.K, loop_rng);
            continue;
        }

        ToyGradients total = zero_gradients(run.model);
        Batch embeddings(cfg.batch_size);
        double l1_sum = 0.0, cb_sum = 0.0, commit_sum = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            ToyForward fwd = toy_forward(run.model, batch[i]->image, quantizing);
            embeddings[i] = fwd.cache.z_e;
            std::vector<double> grad_out;
            l1_sum += l1_loss(fwd.recon, batch[i]->image, &grad_out);
            add_gradients(total, toy_backward(run.model, fwd.cache, grad_out), inv_batch);
            if (quantizing) {
                run.metrics.usage =
                    accumulate_usage(std::move(run.metrics.usage), fwd.quantization);
                add_gradients(total, vq_gradients(run.model, fwd.cache, cfg.commitment_beta),
                              inv_codes);
                for (std::uint32_t l = 0; l < cfg.L; ++l) {
                    double dist2 = 0.0;
                    const Embedding& e = run.model.codebook.entries[fwd.cache.indices[l]];
                    for (std::uint32_t cc = 0; cc < cfg.d; ++cc) {
                        const double diff = fwd.cache.z_e[l][cc] - e[cc];
                        dist2 += diff * diff;
                    }
                    cb_sum += dist2;
                    commit_sum += cfg.commitment_beta * dist2;
                }
            }
        }
        window.push(embeddings);
        apply_sgd(run.model, total, cfg.learning_rate);
        run.metrics.loss_history.push_back(
            {step, l1_sum * inv_batch, cb_sum * inv_codes, commit_sum * inv_codes});
    }

    run.metrics.final_holdout_mse = holdout_mse(run.model, holdout, true);
    return run;
}

void save_toy_model(std::ostream& out, const ToyModel& model) {
    out.write(kToyModelMagic, sizeof(kToyModelMagic));
    for (std::uint32_t v : {model.cfg.hidden, model.cfg.dec_hidden, model.cfg.d, model.cfg.L,
                            model.cfg.K})
        write_u32_le(out, v);
    for (const auto* vec : {&model.params.w1, &model.params.b1, &model.params.w2, &model.params.b2,
                            &model.params.w3, &model.params.b3, &model.params.w4, &model.params.b4})
        for (double v : *vec) write_f64_le(out, v);
    for (const auto& e : model.codebook.entries)
        for (double v : e) write_f64_le(out, v);
    if (!out) throw ParseError("toy model: write failed");
}

ToyModel load_toy_model(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, kToyModelMagic))
        throw ParseError("toy model: bad magic");
    ToyConfig cfg;
    cfg.hidden = read_u32_le(in);
    cfg.dec_hidden = read_u32_le(in);
    cfg.d = read_u32_le(in);
    cfg.L = read_u32_le(in);
    cfg.K = read_u32_le(in);
    cfg.validate();
    ToyModel m;
    m.cfg = cfg;
    auto read_vec = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& x : v) x = read_f64_le(in);
    };
    read_vec(m.params.w1, std::size_t{cfg.hidden} * kPixels);
    read_vec(m.params.b1, cfg.hidden);
    read_vec(m.params.w2, std::size_t{cfg.L} * cfg.d * cfg.hidden);
    read_vec(m.params.b2, std::size_t{cfg.L} * cfg.d);
    read_vec(m.params.w3, std::size_t{cfg.dec_hidden} * cfg.d);
    read_vec(m.params.b3, cfg.dec_hidden);
    read_vec(m.params.w4, std::size_t{kPixels} * cfg.dec_hidden);
    read_vec(m.params.b4, kPixels);
    m.codebook.dim = cfg.d;
    m.codebook.entries.assign(cfg.K, Embedding(cfg.d));
    for (auto& e : m.codebook.entries)
        for (auto& v : e) v = read_f64_le(in);
    if (!in) throw ParseError("toy model: truncated file");
    return m;
}

void save_toy_model(const std::string& path, const ToyModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("toy model: cannot open " + path);
    save_toy_model(out, model);
}

ToyModel load_toy_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("toy model: cannot open " + path);
    return load_toy_model(in);
}

}  // namespace pivq
