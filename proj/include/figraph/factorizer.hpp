#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "figraph/graph.hpp"
#include "figraph/matrix.hpp"
#include "figraph/rng.hpp"

namespace figraph {

/// Pairwise interactions of one node's non-zero features. Pair (j1, j2) with
/// j1 < j2 maps to the vector (x_j1 * v_j1) elementwise-times (x_j2 * v_j2).
/// Pairs are ordered lexicographically; there are nnz*(nnz-1)/2 of them.
struct InteractionSet {
    std::vector<std::pair<int, int>> pairs;
    Mat vectors; // pairs.size() x k

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

/// Feature embedding table V (d x k), row j = embedding of feature j.
Mat init_factorizer(int d, std::size_t k, Rng& rng); // normal(0, 0.01)

/// Enumerates all pairwise interactions of the node's non-zero features.
/// Pairs over zero-valued features are never materialized. When nnz_cap > 0
/// and the node has more non-zeros than the cap, only the nnz_cap entries of
/// largest magnitude take part (ties resolved toward lower index).
InteractionSet factorize_node(const std::vector<FeatureEntry>& x, const Mat& v,
                              std::size_t nnz_cap = 0);

/// The capped (or full) list of feature entries factorize_node operates on.
std::vector<FeatureEntry> capped_features(const std::vector<FeatureEntry>& x,
                                          std::size_t nnz_cap);

} // namespace figraph
