// pivq command-line driver. Exit codes: 0 success, 1 data error, 2 usage.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "pivq/assignment.hpp"
#include "pivq/capacity.hpp"
#include "pivq/codebook_train.hpp"
#include "pivq/core.hpp"
#include "pivq/io.hpp"
#include "pivq/probing.hpp"
#include "pivq/quantizer.hpp"
#include "pivq/sampling.hpp"
#include "pivq/toy_pipeline.hpp"

namespace {

using nlohmann::json;
using namespace pivq;

constexpr const char* kVersion = "pivq 0.1.0";

std::string format_double(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError("config " + path + ": expected a JSON object");
    return j;
}

// Rejects typo'd keys instead of silently ignoring them.
void check_config_keys(const json& j, std::initializer_list<const char*> known,
                       const std::string& path) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ParseError("config " + path + ": unknown key \"" + key + "\"");
    }
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw ParseError("cannot open output " + path);
    return file;
}

unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("PIVQ_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ParseError("PIVQ_THREADS must be a positive integer");
        if (static_cast<unsigned long>(v) < n) n = static_cast<unsigned>(v);
    }
    return n;
}

// Data-parallel per-sample quantization; results land in input order, so
// the outcome is identical to the sequential loop.
std::vector<QuantizationResult> quantize_samples(const Codebook& cb,
                                                 const std::vector<std::vector<Embedding>>& samples,
                                                 QuantizeMethod method) {
    std::vector<QuantizationResult> results(samples.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < samples.size(); i += stride)
            results[i] = method == QuantizeMethod::Matching ? matching_quantize(cb, samples[i])
                                                            : nearest_quantize(cb, samples[i]);
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), samples.size()));
    if (workers <= 1) {
        work(0, 1);
        return results;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                work(w, workers);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

// ---- assign ----------------------------------------------------------

int cmd_assign(const std::string& cost_path, bool oracle) {
    std::ifstream in(cost_path);
    if (!in) throw ParseError("cannot open cost matrix " + cost_path);
    const auto rows = read_embeddings_csv(in);
    if (rows.empty()) throw ParseError("cost matrix is empty");
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const CostMatrix cost(rows.size(), rows[0].size(), std::move(flat));
    const Assignment a = oracle ? brute_force_assignment(cost) : solve_assignment(cost);
    std::cout << "mapping:";
    for (std::uint32_t r : a.mapping) std::cout << ' ' << r;
    std::cout << "\ncost: " << format_double(a.total_cost) << "\n";
    return 0;
}

// ---- quantize --------------------------------------------------------

int cmd_quantize(const std::string& cb_path, const std::string& emb_path,
                 const std::string& method_name, const std::string& out_path,
                 std::uint64_t sample_len) {
    const Codebook cb = load_codebook(cb_path);
    const QuantizeMethod method = quantize_method_from_string(method_name);
    const auto flat = load_embeddings(emb_path);
    if (flat.empty()) throw ParseError("embedding file is empty");
    const std::size_t len = sample_len == 0 ? flat.size() : sample_len;
    if (flat.size() % len != 0)
        throw ParseError("embedding count " + std::to_string(flat.size()) +
                         " is not a multiple of --sample-len " + std::to_string(len));

    std::vector<std::vector<Embedding>> samples;
    for (std::size_t off = 0; off < flat.size(); off += len)
        samples.emplace_back(flat.begin() + off, flat.begin() + off + len);

    const auto results = quantize_samples(cb, samples, method);

    std::vector<CodedSample> coded(results.size());
    UsageStats usage(cb.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "s%06zu", i);
        coded[i] = {id, results[i].code_set};
        usage = accumulate_usage(std::move(usage), results[i]);
    }
    save_coded_dataset(out_path, coded);

    json summary = {{"samples", coded.size()},
                    {"k_data", usage.dataset_usage()},
                    {"max_k_img", usage.max_per_sample}};
    std::cout << summary.dump() << "\n";
    return 0;
}

// ---- capacity --------------------------------------------------------

int cmd_capacity(std::uint64_t kdata, std::uint64_t kimg, bool has_kimg, std::uint64_t len,
                 const std::string& method) {
    double bits = 0.0;
    if (method == "nearest") {
        if (!has_kimg) throw ParseError("--method nearest requires --kimg");
        bits = nearest_capacity_bits(kdata, kimg, len);
    } else if (method == "matching") {
        bits = matching_capacity_bits(kdata, len);
    } else if (method == "standard") {
        bits = standard_vq_capacity_bits(kdata, len);
    } else {
        throw CLI::ValidationError("--method must be nearest, matching or standard");
    }
    std::printf("%.3f\n", bits);
    return 0;
}

int cmd_capacity_curve(std::uint64_t k, std::uint64_t kimg, std::uint64_t lmax,
                       const std::string& out_path) {
    std::vector<std::uint64_t> lens(lmax);
    for (std::uint64_t l = 1; l <= lmax; ++l) lens[l - 1] = l;
    const auto curve = capacity_curve(k, kimg, lens);
    std::ofstream file;
    std::ostream& out = open_out(out_path, file);
    out << "len,standard_bits,nearest_bits,matching_bits\n";
    for (const auto& row : curve)
        out << row.len << ',' << format_double(row.standard_bits, "%.6f") << ','
            << format_double(row.nearest_bits, "%.6f") << ','
            << format_double(row.matching_bits, "%.6f") << "\n";
    if (!out) throw ParseError("write failed: " + out_path);
    return 0;
}

// ---- train-codebook --------------------------------------------------

struct TrainRunConfig {
    TrainerConfig trainer;
    std::uint64_t iterations = 2000;
    std::uint32_t batch_size = 8;
};

TrainRunConfig load_train_config(const std::string& path) {
    TrainRunConfig cfg;
    if (path.empty()) return cfg;
    const json j = load_json_file(path);
    check_config_keys(j,
                      {"K", "d", "L", "T_q", "W", "reinit_count", "learning_rate",
                       "commitment_beta", "method", "seed", "lloyd_iters", "iterations",
                       "batch_size"},
                      path);
    TrainerConfig& t = cfg.trainer;
    if (j.contains("K")) t.K = j["K"].get<std::uint32_t>();
    if (j.contains("d")) t.d = j["d"].get<std::uint32_t>();
    if (j.contains("L")) t.L = j["L"].get<std::uint32_t>();
    if (j.contains("T_q")) t.T_q = j["T_q"].get<std::uint64_t>();
    if (j.contains("W")) t.W = j["W"].get<std::uint64_t>();
    if (j.contains("reinit_count")) t.reinit_count = j["reinit_count"].get<std::uint32_t>();
    if (j.contains("learning_rate")) t.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("commitment_beta")) t.commitment_beta = j["commitment_beta"].get<double>();
    if (j.contains("method")) t.method = quantize_method_from_string(j["method"].get<std::string>());
    if (j.contains("seed")) t.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lloyd_iters")) t.lloyd_iters = j["lloyd_iters"].get<std::uint32_t>();
    if (j.contains("iterations")) cfg.iterations = j["iterations"].get<std::uint64_t>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::uint32_t>();
    return cfg;
}

int cmd_train_codebook(const TrainRunConfig& cfg, const std::string& embeddings,
                       const std::string& out_path, const std::string& report_path) {
    cfg.trainer.validate();
    if (cfg.batch_size == 0) throw ParseError("batch_size must be positive");

    TrainState state(cfg.trainer);
    if (embeddings == "synthetic:gauss16") {
        SyntheticGaussianStream stream(cfg.trainer, cfg.iterations, cfg.batch_size);
        state = run_training([&stream]() { return stream(); }, cfg.trainer);
    } else {
        const auto flat = load_embeddings(embeddings);
        const std::size_t per_batch = std::size_t{cfg.trainer.L} * cfg.batch_size;
        if (flat.size() < per_batch)
            throw ParseError("embedding file holds fewer than one batch (" +
                             std::to_string(per_batch) + " embeddings)");
        std::size_t cursor = 0;
        std::uint64_t left = cfg.iterations;
        auto stream = [&]() -> std::optional<Batch> {
            if (left == 0 || cursor + per_batch > flat.size()) return std::nullopt;
            --left;
            Batch batch(cfg.batch_size);
            for (auto& sample : batch) {
                sample.assign(flat.begin() + cursor, flat.begin() + cursor + cfg.trainer.L);
                cursor += cfg.trainer.L;
            }
            return batch;
        };
        state = run_training(stream, cfg.trainer);
    }

    save_codebook(out_path, state.codebook);

    json curve = json::array();
    for (const auto& rec : state.loss_history)
        curve.push_back({rec.iteration, rec.codebook_loss, rec.commitment_loss});
    json report = {{"iterations", state.iteration},
                   {"k_data", state.usage.dataset_usage()},
                   {"max_k_img", state.usage.max_per_sample},
                   {"final_distortion", state.loss_history.empty()
                                            ? json(nullptr)
                                            : json(state.loss_history.back().codebook_loss)},
                   {"loss_curve", curve}};
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw ParseError("cannot open report " + report_path);
        out << report.dump(2) << "\n";
    }
    std::cout << "k_data=" << state.usage.dataset_usage()
              << " max_k_img=" << state.usage.max_per_sample << " final_distortion="
              << (state.loss_history.empty()
                      ? "n/a"
                      : format_double(state.loss_history.back().codebook_loss))
              << "\n";
    return 0;
}

// ---- interpolate / smooth-path ----------------------------------------

const CodedSample& find_sample(const std::vector<CodedSample>& data, const std::string& id) {
    for (const auto& s : data)
        if (s.id == id) return s;
    throw ParseError("sample id \"" + id + "\" not found in dataset");
}

int cmd_interpolate(const std::string& dataset, const std::string& a, const std::string& b,
                    std::uint64_t n, std::uint64_t seed, const std::string& out_path) {
    const auto data = load_coded_dataset(dataset);
    const CodeSet& ca = find_sample(data, a).codes;
    const CodeSet& cb = find_sample(data, b).codes;
    Rng rng(seed);
    std::vector<CodedSample> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "interp-%03llu", static_cast<unsigned long long>(i));
        out[i] = {id, interpolate(ca, cb, rng)};
    }
    std::ofstream file;
    write_coded_dataset(open_out(out_path, file), out);
    return 0;
}

int cmd_smooth_path(const std::string& dataset, const std::string& a, const std::string& b,
                    std::uint64_t seed, bool reverse, const std::string& out_path) {
    const auto data = load_coded_dataset(dataset);
    const CodeSet& ca = find_sample(data, a).codes;
    const CodeSet& cb = find_sample(data, b).codes;
    Rng rng(seed);
    auto path = smooth_path(ca, cb, rng);  // runs from C_b to C_a
    if (reverse) std::reverse(path.begin(), path.end());
    std::vector<CodedSample> out(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) {
        char id[32];
        std::snprintf(id, sizeof(id), "t%03zu", t);
        out[t] = {id, path[t]};
    }
    std::ofstream file;
    write_coded_dataset(open_out(out_path, file), out);
    return 0;
}

// ---- probe -------------------------------------------------------------

struct LabelTable {
    std::vector<std::string> attributes;
    // per attribute, per dataset row (aligned with the coded dataset)
    std::vector<std::vector<int>> columns;
};

LabelTable read_labels(const std::string& path, const std::vector<CodedSample>& data) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open labels " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("labels " + path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!s.empty() && s.back() == ',') fields.push_back("");
        return fields;
    };

    const auto header = split(line);
    if (header.size() < 2 || header[0] != "id")
        throw ParseError("labels " + path + ": header must be id,<attribute>,...");

    LabelTable table;
    table.attributes.assign(header.begin() + 1, header.end());

    std::vector<std::pair<std::string, std::vector<int>>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw ParseError("labels " + path + ": row with " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(header.size()));
        std::vector<int> vals(table.attributes.size());
        for (std::size_t c = 0; c < vals.size(); ++c) {
            const std::string& f = fields[c + 1];
            if (f != "0" && f != "1")
                throw ParseError("labels " + path + ": value \"" + f + "\" is not 0/1");
            vals[c] = f == "1" ? 1 : 0;
        }
        rows.emplace_back(fields[0], std::move(vals));
    }

    table.columns.assign(table.attributes.size(), std::vector<int>(data.size()));
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto it = std::find_if(rows.begin(), rows.end(),
                                     [&](const auto& row) { return row.first == data[r].id; });
        if (it == rows.end())
            throw ParseError("labels " + path + ": no row for sample id \"" + data[r].id + "\"");
        for (std::size_t c = 0; c < table.attributes.size(); ++c)
            table.columns[c][r] = it->second[c];
    }
    return table;
}

int cmd_probe(const std::string& codes_path, const std::string& labels_path, std::uint32_t folds,
              std::uint64_t seed, std::uint64_t k_flag, const std::string& out_path,
              const LogisticHyper& hyper) {
    const auto data = load_coded_dataset(codes_path);
    if (data.empty()) throw ParseError("coded dataset is empty");
    std::uint64_t k = k_flag;
    if (k == 0) {
        for (const auto& s : data)
            if (!s.codes.empty()) k = std::max<std::uint64_t>(k, s.codes.max_code() + 1);
        if (k == 0) throw ParseError("dataset has no codes; pass --k explicitly");
    }
    const PresenceMatrix x = build_presence(data, static_cast<std::uint32_t>(k));

    const LabelTable labels = read_labels(labels_path, data);
    json results = json::array();
    Rng root(seed);
    for (std::size_t c = 0; c < labels.attributes.size(); ++c) {
        Rng rng = root.split(c);  // per-attribute stream: order-independent
        ProbeResult r = cross_validate(x, labels.columns[c], folds, rng, hyper);
        r.attribute = labels.attributes[c];
        results.push_back({{"attribute", r.attribute},
                           {"cv_accuracy_mean", r.cv_accuracy_mean},
                           {"cv_accuracy_std", r.cv_accuracy_std},
                           {"baseline_accuracy", r.baseline_accuracy},
                           {"folds", r.folds},
                           {"degenerate", r.degenerate}});
        std::cout << r.attribute << ": acc=" << format_double(r.cv_accuracy_mean, "%.4f")
                  << " +- " << format_double(r.cv_accuracy_std, "%.4f")
                  << " baseline=" << format_double(r.baseline_accuracy, "%.4f")
                  << (r.degenerate ? " (degenerate)" : "") << "\n";
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot open output " + out_path);
        out << results.dump(2) << "\n";
    }
    return 0;
}

// ---- toy-train / toy-decode --------------------------------------------

ToyConfig load_toy_config(const std::string& path) {
    ToyConfig cfg;
    if (path.empty()) return cfg;
    const json j = load_json_file(path);
    check_config_keys(j,
                      {"hidden", "dec_hidden", "d", "L", "K", "T_q", "W", "reinit_count",
                       "learning_rate", "commitment_beta", "steps", "batch_size", "train_count",
                       "holdout_count", "seed"},
                      path);
    if (j.contains("hidden")) cfg.hidden = j["hidden"].get<std::uint32_t>();
    if (j.contains("dec_hidden")) cfg.dec_hidden = j["dec_hidden"].get<std::uint32_t>();
    if (j.contains("d")) cfg.d = j["d"].get<std::uint32_t>();
    if (j.contains("L")) cfg.L = j["L"].get<std::uint32_t>();
    if (j.contains("K")) cfg.K = j["K"].get<std::uint32_t>();
    if (j.contains("T_q")) cfg.T_q = j["T_q"].get<std::uint64_t>();
    if (j.contains("W")) cfg.W = j["W"].get<std::uint64_t>();
    if (j.contains("reinit_count")) cfg.reinit_count = j["reinit_count"].get<std::uint32_t>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("commitment_beta")) cfg.commitment_beta = j["commitment_beta"].get<double>();
    if (j.contains("steps")) cfg.steps = j["steps"].get<std::uint64_t>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::uint32_t>();
    if (j.contains("train_count")) cfg.train_count = j["train_count"].get<std::uint32_t>();
    if (j.contains("holdout_count")) cfg.holdout_count = j["holdout_count"].get<std::uint32_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

int cmd_toy_train(const ToyConfig& cfg, const std::string& out_path,
                  const std::string& metrics_path) {
    const ToyRunResult run = train_toy(cfg);
    save_toy_model(out_path, run.model);

    if (!metrics_path.empty()) {
        json curve = json::array();
        for (const auto& rec : run.metrics.loss_history)
            curve.push_back({rec.step, rec.recon_l1, rec.codebook_loss, rec.commitment_loss});
        json metrics = {{"initial_holdout_mse", run.metrics.initial_holdout_mse},
                        {"final_holdout_mse", run.metrics.final_holdout_mse},
                        {"k_data", run.metrics.usage.dataset_usage()},
                        {"max_k_img", run.metrics.usage.max_per_sample},
                        {"usage_histogram", run.metrics.usage.histogram},
                        {"loss_curve", curve}};
        std::ofstream out(metrics_path);
        if (!out) throw ParseError("cannot open metrics " + metrics_path);
        out << metrics.dump(2) << "\n";
    }
    std::cout << "initial_mse=" << format_double(run.metrics.initial_holdout_mse)
              << " final_mse=" << format_double(run.metrics.final_holdout_mse)
              << " k_data=" << run.metrics.usage.dataset_usage() << "\n";
    return 0;
}

int cmd_toy_decode(const std::string& model_path, const std::string& codes_path,
                   const std::string& out_path) {
    const ToyModel model = load_toy_model(model_path);
    const auto data = load_coded_dataset(codes_path);
    std::vector<Embedding> grids(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) grids[i] = decode_codes(model, data[i].codes);
    std::ofstream file;
    write_embeddings_csv(open_out(out_path, file), grids);
    return 0;
}

// ---- stats ---------------------------------------------------------------

int cmd_stats(const std::string& codes_path, std::uint64_t k, std::uint64_t len_flag) {
    const auto data = load_coded_dataset(codes_path);
    UsageStats usage(k);
    for (const auto& s : data) {
        for (std::uint32_t code : s.codes.codes()) {
            if (code >= k)
                throw ParseError("code " + std::to_string(code) + " out of range for --k " +
                                 std::to_string(k));
            ++usage.histogram[code];
        }
        usage.max_per_sample =
            std::max(usage.max_per_sample, static_cast<std::uint32_t>(s.codes.size()));
        ++usage.samples_seen;
    }
    const std::uint32_t k_data = usage.dataset_usage();
    const std::uint64_t len = len_flag == 0 ? usage.max_per_sample : len_flag;

    json out = {{"k_data", k_data},
                {"max_k_img", usage.max_per_sample},
                {"nearest_capacity_bits", nullptr},
                {"matching_capacity_bits", nullptr}};
    if (k_data > 0 && len > 0) {
        out["nearest_capacity_bits"] = nearest_capacity_bits(k_data, usage.max_per_sample, len);
        if (len <= k_data) out["matching_capacity_bits"] = matching_capacity_bits(k_data, len);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pivq: permutation-invariant vector quantization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    int rc = 0;

    // assign
    std::string as_cost;
    bool as_oracle = false;
    auto* assign = app.add_subcommand("assign", "Solve a minimal-cost assignment from a CSV cost matrix");
    assign->add_option("--cost", as_cost, "cost matrix CSV (rows >= cols)")->required();
    assign->add_flag("--oracle", as_oracle, "use the brute-force oracle (cols <= 8)");
    assign->callback([&] { rc = cmd_assign(as_cost, as_oracle); });

    // quantize
    std::string qz_cb, qz_emb, qz_method = "matching", qz_out;
    std::uint64_t qz_len = 0;
    auto* quantize = app.add_subcommand("quantize", "Quantize an embedding file against a codebook");
    quantize->add_option("--codebook", qz_cb, "codebook file (json or binary)")->required();
    quantize->add_option("--embeddings", qz_emb, "embedding file (csv or binary)")->required();
    quantize->add_option("--method", qz_method, "nearest|matching")->required();
    quantize->add_option("--out", qz_out, "output coded dataset (jsonl)")->required();
    quantize->add_option("--sample-len", qz_len,
                         "embeddings per sample (default: whole file is one sample)");
    quantize->callback([&] { rc = cmd_quantize(qz_cb, qz_emb, qz_method, qz_out, qz_len); });

    // capacity
    std::uint64_t cp_kdata = 0, cp_kimg = 0, cp_len = 0;
    std::string cp_method;
    auto* capacity = app.add_subcommand("capacity", "Print an information-capacity bound in bits");
    capacity->add_option("--kdata", cp_kdata, "dataset-level usage K_data (codebook size K for standard)")
        ->required()
        ->check(CLI::PositiveNumber);
    auto* kimg_opt = capacity->add_option("--kimg", cp_kimg, "per-image usage K_img (nearest only)")
                         ->check(CLI::PositiveNumber);
    capacity->add_option("--len", cp_len, "representation length L")
        ->required()
        ->check(CLI::PositiveNumber);
    capacity->add_option("--method", cp_method, "nearest|matching|standard")->required();
    capacity->callback(
        [&] { rc = cmd_capacity(cp_kdata, cp_kimg, kimg_opt->count() > 0, cp_len, cp_method); });

    // capacity-curve
    std::uint64_t cc_k = 0, cc_kimg = 0, cc_lmax = 0;
    std::string cc_out;
    auto* curve = app.add_subcommand("capacity-curve", "CSV of capacity bounds for L = 1..lmax");
    curve->add_option("--k", cc_k, "codebook size K")->required()->check(CLI::PositiveNumber);
    curve->add_option("--kimg", cc_kimg, "per-image usage for the nearest bound")
        ->required()
        ->check(CLI::PositiveNumber);
    curve->add_option("--lmax", cc_lmax, "largest representation length")
        ->required()
        ->check(CLI::PositiveNumber);
    curve->add_option("--out", cc_out, "output CSV (default stdout)");
    curve->callback([&] { rc = cmd_capacity_curve(cc_k, cc_kimg, cc_lmax, cc_out); });

    // train-codebook
    std::string tc_config, tc_emb, tc_out, tc_report;
    std::uint64_t tc_seed = 0, tc_iters = 0;
    std::uint32_t tc_batch = 0;
    auto* train = app.add_subcommand("train-codebook",
                                     "Train a codebook with delayed KMeans++ initialization");
    train->add_option("--config", tc_config, "JSON config; keys mirror the trainer fields");
    train->add_option("--embeddings", tc_emb, "embedding file or synthetic:gauss16")->required();
    train->add_option("--out", tc_out, "output codebook file")->required();
    train->add_option("--report", tc_report, "JSON training report");
    auto* tc_seed_opt = train->add_option("--seed", tc_seed, "override config seed");
    auto* tc_iter_opt = train->add_option("--iterations", tc_iters, "override iteration count");
    auto* tc_batch_opt = train->add_option("--batch-size", tc_batch, "override batch size");
    train->callback([&] {
        TrainRunConfig cfg = load_train_config(tc_config);
        if (tc_seed_opt->count()) cfg.trainer.seed = tc_seed;
        if (tc_iter_opt->count()) cfg.iterations = tc_iters;
        if (tc_batch_opt->count()) cfg.batch_size = tc_batch;
        rc = cmd_train_codebook(cfg, tc_emb, tc_out, tc_report);
    });

    // interpolate
    std::string ip_dataset, ip_a, ip_b, ip_out;
    std::uint64_t ip_n = 10, ip_seed = 0;
    auto* interp = app.add_subcommand("interpolate", "Sample interpolations between two coded samples");
    interp->add_option("--dataset", ip_dataset, "coded dataset (jsonl)")->required();
    interp->add_option("--a", ip_a, "first sample id")->required();
    interp->add_option("--b", ip_b, "second sample id")->required();
    interp->add_option("--n", ip_n, "number of draws");
    interp->add_option("--seed", ip_seed, "rng seed");
    interp->add_option("--out", ip_out, "output jsonl (default stdout)");
    interp->callback([&] { rc = cmd_interpolate(ip_dataset, ip_a, ip_b, ip_n, ip_seed, ip_out); });

    // smooth-path
    std::string sp_dataset, sp_a, sp_b, sp_out;
    std::uint64_t sp_seed = 0;
    bool sp_reverse = false;
    auto* spath = app.add_subcommand("smooth-path",
                                     "Emit a one-swap-per-step path between two coded samples");
    spath->add_option("--dataset", sp_dataset, "coded dataset (jsonl)")->required();
    spath->add_option("--a", sp_a, "first sample id (path ends here)")->required();
    spath->add_option("--b", sp_b, "second sample id (path starts here)")->required();
    spath->add_option("--seed", sp_seed, "rng seed for the side permutations");
    spath->add_flag("--reverse", sp_reverse, "emit the path from --a to --b instead");
    spath->add_option("--out", sp_out, "output jsonl (default stdout)");
    spath->callback(
        [&] { rc = cmd_smooth_path(sp_dataset, sp_a, sp_b, sp_seed, sp_reverse, sp_out); });

    // probe
    std::string pb_codes, pb_labels, pb_out;
    std::uint32_t pb_folds = 5;
    std::uint64_t pb_seed = 0, pb_k = 0;
    LogisticHyper pb_hyper;
    auto* probe = app.add_subcommand("probe", "Logistic-regression probe of code presence features");
    probe->add_option("--codes", pb_codes, "coded dataset (jsonl)")->required();
    probe->add_option("--labels", pb_labels, "CSV: id,<attribute>,... with 0/1 rows")->required();
    probe->add_option("--folds", pb_folds, "cross-validation folds");
    probe->add_option("--seed", pb_seed, "rng seed for fold assignment");
    probe->add_option("--k", pb_k, "codebook size (default: max code + 1)");
    probe->add_option("--l2", pb_hyper.l2, "L2 regularization strength");
    probe->add_option("--epochs", pb_hyper.epochs, "gradient-descent epochs");
    probe->add_option("--lr", pb_hyper.lr, "gradient-descent learning rate");
    probe->add_option("--out", pb_out, "JSON report path");
    probe->callback(
        [&] { rc = cmd_probe(pb_codes, pb_labels, pb_folds, pb_seed, pb_k, pb_out, pb_hyper); });

    // toy-train
    std::string tt_config, tt_out, tt_metrics;
    std::uint64_t tt_seed = 0, tt_steps = 0;
    auto* toy = app.add_subcommand("toy-train", "Train the toy permutation-invariant autoencoder");
    toy->add_option("--config", tt_config, "JSON config; keys mirror the toy fields");
    toy->add_option("--out", tt_out, "output model file")->required();
    toy->add_option("--metrics", tt_metrics, "JSON metrics path");
    auto* tt_seed_opt = toy->add_option("--seed", tt_seed, "override config seed");
    auto* tt_steps_opt = toy->add_option("--steps", tt_steps, "override step count");
    toy->callback([&] {
        ToyConfig cfg = load_toy_config(tt_config);
        if (tt_seed_opt->count()) cfg.seed = tt_seed;
        if (tt_steps_opt->count()) cfg.steps = tt_steps;
        rc = cmd_toy_train(cfg, tt_out, tt_metrics);
    });

    // toy-decode
    std::string td_model, td_codes, td_out;
    auto* decode = app.add_subcommand("toy-decode", "Decode CodeSets to reconstruction grids");
    decode->add_option("--model", td_model, "toy model file")->required();
    decode->add_option("--codes", td_codes, "coded dataset (jsonl)")->required();
    decode->add_option("--out", td_out, "output CSV (default stdout)");
    decode->callback([&] { rc = cmd_toy_decode(td_model, td_codes, td_out); });

    // stats
    std::string st_codes;
    std::uint64_t st_k = 0, st_len = 0;
    auto* stats = app.add_subcommand("stats", "Usage summary and capacity at the measured usage");
    stats->add_option("--codes", st_codes, "coded dataset (jsonl)")->required();
    stats->add_option("--k", st_k, "codebook size")->required()->check(CLI::PositiveNumber);
    stats->add_option("--len", st_len, "representation length L (default: measured max K_img)");
    stats->callback([&] { rc = cmd_stats(st_codes, st_k, st_len); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, std::cout);
        return code == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        std::cout << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
