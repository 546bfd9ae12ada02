#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pivq/assignment.hpp"
#include "pivq/capacity.hpp"
#include "pivq/codebook_train.hpp"
#include "pivq/core.hpp"
#include "pivq/quantizer.hpp"
#include "pivq/sampling.hpp"

namespace py = pybind11;
using namespace pivq;

namespace {

CostMatrix cost_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("cost matrix is empty");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows[0].size()) throw std::invalid_argument("ragged cost matrix");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return CostMatrix(rows.size(), rows[0].size(), std::move(flat));
}

Codebook codebook_from_rows(const std::vector<Embedding>& entries) {
    if (entries.empty()) throw std::invalid_argument("codebook is empty");
    return Codebook(entries[0].size(), entries);
}

py::dict result_to_dict(const QuantizationResult& r) {
    py::dict d;
    d["indices"] = r.indices;
    d["code_set"] = r.code_set.codes();
    d["quantized"] = r.quantized;
    d["total_distance"] = r.total_distance;
    return d;
}

}  // namespace

PYBIND11_MODULE(_pivq, m) {
    m.doc() = "Permutation-invariant vector quantization core";

    m.def(
        "solve_assignment",
        [](const std::vector<std::vector<double>>& cost) {
            const Assignment a = solve_assignment(cost_from_rows(cost));
            return py::make_tuple(a.mapping, a.total_cost);
        },
        py::arg("cost"), "Minimal-cost injective column->row mapping and its total cost");

    m.def(
        "brute_force_assignment",
        [](const std::vector<std::vector<double>>& cost) {
            const Assignment a = brute_force_assignment(cost_from_rows(cost));
            return py::make_tuple(a.mapping, a.total_cost);
        },
        py::arg("cost"), "Exhaustive assignment oracle (cols <= 8)");

    m.def(
        "nearest_quantize",
        [](const std::vector<Embedding>& codebook, const std::vector<Embedding>& embeddings) {
            return result_to_dict(nearest_quantize(codebook_from_rows(codebook), embeddings));
        },
        py::arg("codebook"), py::arg("embeddings"));

    m.def(
        "matching_quantize",
        [](const std::vector<Embedding>& codebook, const std::vector<Embedding>& embeddings,
           bool squared_distances) {
            return result_to_dict(
                matching_quantize(codebook_from_rows(codebook), embeddings, squared_distances));
        },
        py::arg("codebook"), py::arg("embeddings"), py::arg("squared_distances") = false);

    m.def("matching_capacity_bits", &matching_capacity_bits, py::arg("k_data"), py::arg("len"));
    m.def("nearest_capacity_bits",
          py::overload_cast<std::uint64_t, std::uint64_t, std::uint64_t>(&nearest_capacity_bits),
          py::arg("k_data"), py::arg("k_img"), py::arg("len"));
    m.def("standard_vq_capacity_bits", &standard_vq_capacity_bits, py::arg("k"), py::arg("len"));

    m.def(
        "interpolate",
        [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
           std::uint64_t seed) {
            Rng rng(seed);
            return interpolate(CodeSet::from_indices(a), CodeSet::from_indices(b), rng).codes();
        },
        py::arg("a"), py::arg("b"), py::arg("seed"),
        "One Algorithm-1 interpolation draw between two code sets");

    m.def(
        "smooth_path",
        [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
           std::uint64_t seed) {
            Rng rng(seed);
            const auto path = smooth_path(CodeSet::from_indices(a), CodeSet::from_indices(b), rng);
            std::vector<std::vector<std::uint32_t>> out;
            for (const auto& cs : path) out.push_back(cs.codes());
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("seed"),
        "One-swap-per-step path from b to a with seeded side permutations");

    m.def(
        "count_paths",
        [](std::uint64_t r_len) {
            return py::module_::import("builtins").attr("int")(count_paths(r_len).get_str());
        },
        py::arg("r_len"), "(r_len!)^2 as an exact Python integer");

    m.def(
        "kmeanspp_init",
        [](const std::vector<Embedding>& samples, std::uint32_t k, std::uint64_t seed,
           std::uint32_t lloyd_iters) {
            Rng rng(seed);
            return kmeanspp_init(samples, k, rng, lloyd_iters).entries;
        },
        py::arg("samples"), py::arg("k"), py::arg("seed"), py::arg("lloyd_iters") = 10,
        "KMeans++ seeding plus Lloyd refinement; returns the centroids");
}
