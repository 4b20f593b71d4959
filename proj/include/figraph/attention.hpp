#pragma once

#include <span>
#include <vector>

#include "figraph/factorizer.hpp"
#include "figraph/matrix.hpp"

namespace figraph {

/// Glorot-uniform k x k attention projection.
Mat init_attention(std::size_t k, Rng& rng);

struct AttendResult {
    std::vector<double> alpha; // one weight per interaction pair (empty when disabled)
    std::vector<double> f;     // pooled interaction vector, length k
};

/// Scores each interaction e with logit h^T tanh(W_f e), softmax-normalizes
/// over the node's own pairs, and pools f = sum alpha * e. With the attention
/// flag off the pooling is an unweighted sum (alpha left empty). An empty
/// interaction set yields f = 0 in both modes.
AttendResult attend(std::span<const double> h, const InteractionSet& interactions,
                    const Mat& w_f, bool enabled);

/// z = h (+)  f, h first.
std::vector<double> fuse(std::span<const double> h, std::span<const double> f);

/// Reverse-mode companion of attend(). Adds this node's contributions to
/// dw_f, returns the gradient w.r.t. h and w.r.t. each interaction vector.
struct AttendGrads {
    std::vector<double> dh;  // length k
    Mat d_interactions;      // pairs x k
};

AttendGrads attend_backward(std::span<const double> h, const InteractionSet& interactions,
                            const Mat& w_f, bool enabled,
                            const AttendResult& fwd, std::span<const double> df,
                            Mat& dw_f);

} // namespace figraph
