#include "pivq/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace pivq {

InterpolationPair split_pair(const CodeSet& a, const CodeSet& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("split_pair: CodeSets must have equal cardinality");
    InterpolationPair pair;
    pair.common = set_intersection(a, b);
    pair.exclusive = symmetric_difference(a, b);
    pair.side_a = set_difference(a, b).codes();
    pair.side_b = set_difference(b, a).codes();
    return pair;
}

CodeSet interpolate(const CodeSet& a, const CodeSet& b, Rng& rng) {
    const InterpolationPair pair = split_pair(a, b);
    std::vector<std::uint32_t> out = pair.common.codes();
    std::vector<std::uint32_t> pool = pair.exclusive.codes();
    // Uniform draws without replacement until the set is back at full size.
    while (out.size() < a.size()) {
        const std::size_t idx = rng.next_below(pool.size());
        out.push_back(pool[idx]);
        pool[idx] = pool.back();
        pool.pop_back();
    }
    return CodeSet::from_indices(out);
}

namespace {

// perm must reorder base exactly (same multiset; both are duplicate-free).
void check_permutation(const std::vector<std::uint32_t>& base,
                       const std::vector<std::uint32_t>& perm, const char* side) {
    std::vector<std::uint32_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != base)
        throw std::invalid_argument(std::string("smooth_path: perm_") + side +
                                    " is not a permutation of side_" + side);
}

}  // namespace

std::vector<CodeSet> smooth_path(const InterpolationPair& pair,
                                 const std::vector<std::uint32_t>& perm_a,
                                 const std::vector<std::uint32_t>& perm_b) {
    check_permutation(pair.side_a, perm_a, "a");
    check_permutation(pair.side_b, perm_b, "b");
    const std::size_t r = perm_a.size();
    std::vector<CodeSet> path;
    path.reserve(r + 1);
    for (std::size_t t = 0; t <= r; ++t) {
        std::vector<std::uint32_t> codes = pair.common.codes();
        codes.insert(codes.end(), perm_a.begin(), perm_a.begin() + t);
        codes.insert(codes.end(), perm_b.begin() + t, perm_b.end());
        path.push_back(CodeSet::from_indices(codes));
    }
    return path;
}

std::vector<CodeSet> smooth_path(const CodeSet& a, const CodeSet& b, Rng& rng) {
    InterpolationPair pair = split_pair(a, b);
    std::vector<std::uint32_t> perm_a = pair.side_a;
    std::vector<std::uint32_t> perm_b = pair.side_b;
    rng.shuffle(perm_a);
    rng.shuffle(perm_b);
    return smooth_path(pair, perm_a, perm_b);
}

BigInt count_paths(std::uint64_t r_len) {
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), r_len);
    return f * f;
}

}  // namespace pivq
