// Interpolation-based sampling over CodeSets: the common/exclusive split,
// uniform without-replacement interpolation, and approximately-smooth paths
// that swap one code per step.
#pragma once

#include <cstdint>
#include <vector>

#include "pivq/capacity.hpp"
#include "pivq/core.hpp"

namespace pivq {

struct InterpolationPair {
    CodeSet common;     // C_a intersect C_b
    CodeSet exclusive;  // symmetric difference
    std::vector<std::uint32_t> side_a;  // C_a \ C_b, ascending
    std::vector<std::uint32_t> side_b;  // C_b \ C_a, ascending
};

/// Splits two equal-size CodeSets into shared and per-side codes.
/// side_a and side_b always have equal length |R|.
InterpolationPair split_pair(const CodeSet& a, const CodeSet& b);

/// One interpolation draw: keeps the common codes and fills the remaining
/// L - |common| slots uniformly without replacement from the exclusive pool.
CodeSet interpolate(const CodeSet& a, const CodeSet& b, Rng& rng);

/// Path of |R|+1 CodeSets; element t is common, the first t of perm_a, and
/// the last |R|-t of perm_b, so t runs from C_b (t=0) to C_a (t=|R|).
/// perm_a/perm_b must be reorderings of pair.side_a/pair.side_b.
std::vector<CodeSet> smooth_path(const InterpolationPair& pair,
                                 const std::vector<std::uint32_t>& perm_a,
                                 const std::vector<std::uint32_t>& perm_b);

/// Convenience: draws the two permutations from rng, then builds the path.
std::vector<CodeSet> smooth_path(const CodeSet& a, const CodeSet& b, Rng& rng);

/// Number of distinct smooth paths between sets with |R| exclusive codes
/// per side: (|R|!)^2.
BigInt count_paths(std::uint64_t r_len);

}  // namespace pivq
