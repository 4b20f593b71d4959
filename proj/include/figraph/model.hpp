#pragma once

#include "figraph/aggregator.hpp"
#include "figraph/attention.hpp"
#include "figraph/config.hpp"
#include "figraph/factorizer.hpp"
#include "figraph/graph.hpp"

namespace figraph {

/// All trainable tensors. The classifier head is present in semi-supervised
/// mode only; V and W_f are absent when the factorizer / attention are
/// disabled by configuration.
struct ModelParams {
    AggregatorParams aggregator;
    Mat v;    // d x k feature embeddings
    Mat w_f;  // k x k attention projection
    Mat head; // z_dim x C classifier

    void validate(const TrainConfig& cfg, std::size_t d, int num_classes) const;
};

ModelParams init_model(const TrainConfig& cfg, std::size_t d, int num_classes, Rng& rng);

/// Gradient tensors mirroring ModelParams shapes.
struct ModelGrads {
    std::vector<Mat> aggregator;
    Mat v;
    Mat w_f;
    Mat head;
};

ModelGrads zero_grads_like(const ModelParams& p);

/// Forward state kept for the backward pass. Attention internals are
/// recomputed per node in backward rather than stored.
struct ModelForward {
    AggregatorCache agg;
    Mat f; // n x k pooled interactions; empty when the factorizer is off
    Mat z; // n x z_dim fused representations

    const Mat& h() const { return agg.final_output(); }
};

/// Full forward pass over every node. `training` enables dropout (driven by
/// `rng`); evaluation is deterministic.
ModelForward model_forward(const SparseGraph& g, const GraphTopology& topo,
                           const ModelParams& p, const TrainConfig& cfg, bool training,
                           Rng& rng);

/// Reverse pass from dL/dZ. Returns gradients for aggregator weights, V and
/// W_f; the head gradient is produced by the loss and left zero here.
ModelGrads model_backward(const SparseGraph& g, const GraphTopology& topo,
                          const ModelParams& p, const TrainConfig& cfg,
                          const ModelForward& fwd, const Mat& dz);

} // namespace figraph
