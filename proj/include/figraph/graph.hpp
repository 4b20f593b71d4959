#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "figraph/matrix.hpp"

namespace figraph {

/// One non-zero feature of a node.
struct FeatureEntry {
    int index = 0;
    double value = 0.0;

    friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Undirected edge, stored canonically with u < v.
struct Edge {
    int u = 0;
    int v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Immutable sparse-feature graph: topology as a canonical edge set, per-node
/// sparse feature rows, and optional class labels.
///
/// Invariants (enforced by validate()):
///  - no self-loops, edges sorted and unique with u < v
///  - feature indices in [0, d) and strictly increasing within a node
///  - labels, when present, in [0, num_classes) or -1 for unlabeled nodes
struct SparseGraph {
    int n = 0;
    int d = 0;
    int num_classes = 0;                              // 0 when no labels
    std::vector<Edge> edges;                          // sorted, unique
    std::vector<std::vector<FeatureEntry>> features;  // size n
    std::vector<int> labels;                          // empty or size n; -1 = unlabeled

    std::size_t num_edges() const { return edges.size(); }
    bool has_labels() const { return !labels.empty(); }

    bool has_edge(int a, int b) const;

    /// Neighbor lists derived from the edge set.
    std::vector<std::vector<int>> adjacency() const;

    /// Indices of nodes with a label.
    std::vector<int> labeled_nodes() const;

    void validate() const;
};

/// Same nodes, features and labels; topology replaced by the given edge
/// subset. Used to hide held-out edges from message passing.
SparseGraph with_edges(const SparseGraph& g, const std::vector<Edge>& edges);

/// Symmetric GCN propagation matrix D^{-1/2} (A + I) D^{-1/2} in CSR form,
/// where D is the degree matrix of A + I. Column indices ascend per row.
struct NormalizedAdjacency {
    int n = 0;
    std::vector<int> row_ptr; // size n + 1
    std::vector<int> col;
    std::vector<double> val;
};

NormalizedAdjacency normalize_adjacency(const SparseGraph& g);

/// A_hat (n x n) * H (n x q)
Mat spmm(const NormalizedAdjacency& a, const Mat& h);

/// Message-passing structure derived from one edge set: the normalized
/// adjacency for GCN layers and plain neighbor lists for mean aggregation.
struct GraphTopology {
    NormalizedAdjacency a_hat;
    std::vector<std::vector<int>> neighbors;

    static GraphTopology build(const SparseGraph& g) {
        return {normalize_adjacency(g), g.adjacency()};
    }
};

/// Node and edge partitions for training/validation/testing, plus the sampled
/// negative edges paired with each positive split.
struct DataSplits {
    std::vector<int> train_nodes, val_nodes, test_nodes;
    std::vector<Edge> train_pos, val_pos, test_pos;
    std::vector<Edge> train_neg, val_neg, test_neg;
};

struct SplitRatios {
    double train = 0.0;
    double val = 0.0;
    double test = 0.0;

    void validate() const; // positive, summing to 1
};

/// Loads a graph from the three text files described in the README. The label
/// file is optional. Directed duplicates are merged, raw self-loops dropped
/// (with a warning to stderr), explicit zero feature values discarded.
SparseGraph load_graph(const std::string& edge_file,
                       const std::string& feature_file,
                       const std::optional<std::string>& label_file = std::nullopt);

/// Random disjoint node partition with sizes round(ratio * n); the rounding
/// remainder goes to the test split. Requires labels.
DataSplits split_nodes(const SparseGraph& g, const SplitRatios& ratios, std::uint64_t seed);

/// Random disjoint partition of the positive edge set (no negatives yet).
DataSplits split_edges(const SparseGraph& g, const SplitRatios& ratios, std::uint64_t seed);

/// `count` distinct non-edges, uniform over all unordered pairs that are
/// neither graph edges nor in `exclude`, self-loops excluded.
std::vector<Edge> sample_negative_edges(const SparseGraph& g,
                                        std::size_t count,
                                        const std::vector<Edge>& exclude,
                                        std::uint64_t seed);

/// Fills train/val/test negative sets with sizes matching the positive sets;
/// the three sets are mutually disjoint and avoid every positive edge.
void attach_negative_edges(const SparseGraph& g, DataSplits& splits, std::uint64_t seed);

} // namespace figraph
