#pragma once

#include <cstdint>
#include <vector>

#include "figraph/graph.hpp"
#include "figraph/matrix.hpp"
#include "figraph/rng.hpp"

namespace figraph {

enum class AggregatorKind { gcn, sage_mean };

const char* to_string(AggregatorKind kind);
AggregatorKind aggregator_kind_from_string(const std::string& name);

/// Stacked message-passing layers. dims = {d, hidden..., k}; weights[l] maps
/// dims[l] -> dims[l+1] (GCN) or 2*dims[l] -> dims[l+1] (mean aggregation,
/// where the input is the self/neighborhood-mean concatenation).
struct AggregatorParams {
    AggregatorKind kind = AggregatorKind::gcn;
    std::vector<std::size_t> dims;
    std::vector<Mat> weights;

    std::size_t layers() const { return weights.size(); }
    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }

    void validate() const;
};

/// Glorot-uniform initialization for every layer.
AggregatorParams init_aggregator(AggregatorKind kind, const std::vector<std::size_t>& dims,
                                 Rng& rng);

/// One GCN layer: act(A_hat * H * W).
Mat gcn_layer(const Mat& h, const NormalizedAdjacency& a, const Mat& w, bool relu);

/// One mean-aggregation layer: per node, act(W^T (h_i (+) mean_{j in N_i} h_j)).
/// Isolated nodes use the zero vector as their neighborhood mean.
Mat sage_mean_layer(const Mat& h, const std::vector<std::vector<int>>& neighbors, const Mat& w,
                    bool relu);

/// Everything the backward pass needs from one forward run. Layer-0 input is
/// kept sparse (the feature rows after dropout); deeper inputs are dense.
struct AggregatorCache {
    std::vector<std::vector<FeatureEntry>> x0;
    std::vector<Mat> inputs;        // layers 1..L-1, post-dropout
    std::vector<Mat> masks;         // dropout scale per entry; empty when dropout off
    std::vector<Mat> outputs;       // layers 0..L-1, post-activation
    std::vector<char> relu_applied; // per layer

    const Mat& final_output() const { return outputs.back(); }
};

/// Full stack with ReLU between layers and inverted dropout on every layer
/// input while training. `relu_last` controls the activation after the final
/// layer. Deterministic for a fixed rng state.
AggregatorCache aggregator_forward(const SparseGraph& g, const GraphTopology& topo,
                                   const AggregatorParams& p, double dropout, bool training,
                                   bool relu_last, Rng& dropout_rng);

/// Gradients of a scalar loss w.r.t. every layer weight, given the gradient
/// d_out w.r.t. the final output. Input features receive no gradient.
std::vector<Mat> aggregator_backward(const GraphTopology& topo, const AggregatorParams& p,
                                     const AggregatorCache& cache, Mat d_out);

/// Convenience wrapper returning only H^L.
Mat run_aggregator(const SparseGraph& g, const GraphTopology& topo, const AggregatorParams& p,
                   double dropout, bool training, std::uint64_t seed, bool relu_last = true);

} // namespace figraph
