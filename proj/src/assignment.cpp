#include "pivq/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pivq {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ < cols_) {
        throw std::invalid_argument("CostMatrix: rows (" + std::to_string(rows_) +
                                    ") must be >= cols (" + std::to_string(cols_) + ")");
    }
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("CostMatrix: expected " + std::to_string(rows_ * cols_) +
                                    " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("CostMatrix: non-finite entry");
        }
    }
}

namespace {

double mapping_cost(const CostMatrix& cost, const std::vector<std::uint32_t>& mapping) {
    double total = 0.0;
    for (std::size_t j = 0; j < mapping.size(); ++j) {
        total += cost.at(mapping[j], j);
    }
    return total;
}

// Shortest-augmenting-path solve over the square padding of `cost`.
// The algorithm's "workers" are our columns (real ones first, then the
// zero-cost virtual padding) and its "jobs" are our rows. Outputs the
// column->row mapping for real columns plus the dual potentials, which
// satisfy u[i] + v[j] <= padded(i, j) with equality on assigned pairs.
struct JvResult {
    std::vector<std::uint32_t> mapping;  // real columns only
    std::vector<double> col_potential;   // u, indexed by padded column
    std::vector<double> row_potential;   // v, indexed by row
};

JvResult jv_solve(const CostMatrix& cost) {
    const std::size_t n = cost.rows();
    const std::size_t cols = cost.cols();
    const double inf = std::numeric_limits<double>::infinity();

    auto padded = [&](std::size_t i, std::size_t j) {
        return i < cols ? cost.at(j, i) : 0.0;  // i: padded column, j: row
    };

    // 1-indexed working arrays, column 0 is the virtual root.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = padded(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    JvResult res;
    res.mapping.assign(cols, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t col = match[j] - 1;
        if (col < cols) res.mapping[col] = static_cast<std::uint32_t>(j - 1);
    }
    res.col_potential.assign(u.begin() + 1, u.end());
    res.row_potential.assign(v.begin() + 1, v.end());
    return res;
}

// Kuhn's augmenting-path matching restricted to the given adjacency.
// row_of[r] holds the left vertex currently matched to row r, or -1.
bool try_augment(std::size_t left, const std::vector<std::vector<std::uint32_t>>& adj,
                 std::vector<char>& visited, std::vector<std::int64_t>& row_of) {
    for (std::uint32_t r : adj[left]) {
        if (visited[r]) continue;
        visited[r] = 1;
        if (row_of[r] < 0 ||
            try_augment(static_cast<std::size_t>(row_of[r]), adj, visited, row_of)) {
            row_of[r] = static_cast<std::int64_t>(left);
            return true;
        }
    }
    return false;
}

// True iff every left vertex in `lefts` can be matched simultaneously.
bool perfect_matching_exists(const std::vector<std::size_t>& lefts,
                             const std::vector<std::vector<std::uint32_t>>& adj,
                             std::size_t n_rows, const std::vector<char>& row_blocked) {
    std::vector<std::int64_t> row_of(n_rows, -1);
    std::vector<char> visited(n_rows, 0);
    for (std::size_t left : lefts) {
        std::fill(visited.begin(), visited.end(), 0);
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (row_blocked[r]) visited[r] = 1;
        }
        if (!try_augment(left, adj, visited, row_of)) return false;
    }
    return true;
}

// Rewrites `mapping` to the lexicographically smallest optimum when ties
// exist. Ties are detected through the dual potentials: any optimal
// solution uses only edges with zero reduced cost, so columns with a
// single tight row admit no alternative. Candidate sets use a small
// tolerance; the result is verified against the incumbent total with an
// exact comparison and discarded on mismatch.
void lexicographic_tie_break(const CostMatrix& cost, const JvResult& jv,
                             std::vector<std::uint32_t>& mapping, double jv_total) {
    const std::size_t n = cost.rows();
    const std::size_t cols = cost.cols();

    double max_abs = 0.0;
    for (double x : cost.values()) max_abs = std::max(max_abs, std::abs(x));
    const double tol = 1e-9 * (1.0 + max_abs);

    auto padded = [&](std::size_t i, std::size_t j) {
        return i < cols ? cost.at(j, i) : 0.0;
    };

    // Tight-edge adjacency for every padded column.
    std::vector<std::vector<std::uint32_t>> adj(n);
    bool any_tie = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < n; ++r) {
            const double reduced = padded(i, r) - jv.col_potential[i] - jv.row_potential[r];
            if (reduced <= tol) adj[i].push_back(static_cast<std::uint32_t>(r));
        }
        if (i < cols && adj[i].size() > 1) any_tie = true;
    }
    if (!any_tie) return;  // unique optimum on every real column

    std::vector<std::uint32_t> refined(cols);
    std::vector<char> row_used(n, 0);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<std::size_t> rest;
        for (std::size_t i = c + 1; i < n; ++i) rest.push_back(i);
        bool fixed = false;
        for (std::uint32_t r : adj[c]) {
            if (row_used[r]) continue;
            row_used[r] = 1;
            if (perfect_matching_exists(rest, adj, n, row_used)) {
                refined[c] = r;
                fixed = true;
                break;
            }
            row_used[r] = 0;
        }
        if (!fixed) return;  // tolerance artefact; keep the solver mapping
    }

    if (mapping_cost(cost, refined) == jv_total) {
        mapping = std::move(refined);
    }
}

}  // namespace

Assignment solve_assignment(const CostMatrix& cost) {
    Assignment out;
    if (cost.cols() == 0) return out;

    JvResult jv = jv_solve(cost);
    out.mapping = jv.mapping;
    out.total_cost = mapping_cost(cost, out.mapping);
    lexicographic_tie_break(cost, jv, out.mapping, out.total_cost);
    return out;
}

namespace {

void brute_force_search(const CostMatrix& cost, std::size_t col, double partial,
                        std::vector<std::uint32_t>& current, std::vector<char>& used,
                        Assignment& best) {
    if (col == cost.cols()) {
        if (partial < best.total_cost) {
            best.total_cost = partial;
            best.mapping = current;
        }
        return;
    }
    for (std::uint32_t r = 0; r < cost.rows(); ++r) {
        if (used[r]) continue;
        used[r] = 1;
        current[col] = r;
        brute_force_search(cost, col + 1, partial + cost.at(r, col), current, used, best);
        used[r] = 0;
    }
}

}  // namespace

Assignment brute_force_assignment(const CostMatrix& cost) {
    if (cost.cols() > 8) {
        throw std::invalid_argument("brute_force_assignment: cols must be <= 8");
    }
    Assignment best;
    if (cost.cols() == 0) return best;

    best.total_cost = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> current(cost.cols(), 0);
    std::vector<char> used(cost.rows(), 0);
    brute_force_search(cost, 0, 0.0, current, used, best);
    return best;
}

}  // namespace pivq
