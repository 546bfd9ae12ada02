// Exact minimal-cost bipartite assignment of L embedding columns to K
// codebook rows (K >= L), plus a brute-force oracle for testing.
#pragma once

#include <cstdint>
#include <vector>

#include "pivq/core.hpp"

namespace pivq {

/// Rectangular cost matrix with rows >= cols, all entries finite.
class CostMatrix {
public:
    /// `values` is row-major with rows*cols entries.
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

/// Column j of the cost matrix is assigned to row mapping[j]; rows are
/// pairwise distinct. total_cost is the sum of the selected entries taken
/// in ascending column order.
struct Assignment {
    std::vector<std::uint32_t> mapping;
    double total_cost = 0.0;
};

/// Globally optimal injective column->row assignment via the
/// Jonker-Volgenant shortest-augmenting-path method, O(n^3) with
/// n = rows. The rectangular matrix is treated as padded to square with
/// zero-cost virtual columns, which are discarded from the output. Among
/// equal-cost optima the lexicographically smallest mapping vector is
/// returned.
Assignment solve_assignment(const CostMatrix& cost);

/// Exhaustive minimum over all injective mappings; same tie-break rule as
/// solve_assignment. Guarded to cols <= 8.
Assignment brute_force_assignment(const CostMatrix& cost);

}  // namespace pivq
