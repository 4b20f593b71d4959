#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "figraph/matrix.hpp"

namespace figraph {

/// Parameters of the node-independent scoring model: a global bias, a 2k
/// projection vector, a d x k linear map standing in for a single linear
/// aggregator layer, and the shared d x k feature embeddings.
struct ReductionParams {
    double w0 = 0.0;
    std::vector<double> u; // length 2k
    Mat w;                 // d x k
    Mat v;                 // d x k

    void validate() const;
};

/// y = w0 + u^T (W^T x (+) sum_{j1<j2} x_j1 v_j1 (.) x_j2 v_j2).
/// With fix_u set, u is replaced by the all-ones vector.
double simplified_predict(const std::vector<double>& x, const ReductionParams& params,
                          bool fix_u);

/// w_j = sum_f W(j, f): the linear weights induced by collapsing the d x k
/// map against the all-ones vector.
std::vector<double> reduced_linear_weights(const Mat& w);

/// Vanilla second-order factorization machine, computed by the direct double
/// loop over all feature pairs (the oracle form).
double vanilla_fm_predict(const std::vector<double>& x, double w0,
                          const std::vector<double>& w, const Mat& v);

/// Same score via the O(kd) identity 0.5 * sum_f [(sum_j v_jf x_j)^2 -
/// sum_j v_jf^2 x_j^2]; used to cross-check the double loop.
double vanilla_fm_predict_fast(const std::vector<double>& x, double w0,
                               const std::vector<double>& w, const Mat& v);

struct ReductionFailure {
    std::size_t trial = 0;
    double simplified = 0.0;
    double vanilla = 0.0;
};

struct ReductionReport {
    std::size_t trials = 0;
    double max_abs_deviation = 0.0;
    double threshold = 1e-10;
    std::vector<ReductionFailure> failures;

    bool pass() const { return max_abs_deviation < threshold; }
};

/// Random instances (d <= 10, k <= 4): the simplified model with fixed u and
/// w = reduced_linear_weights(W) must match the vanilla FM exactly up to
/// float tolerance.
ReductionReport verify_reduction(std::size_t trials, std::uint64_t seed);

std::string format_reduction_report(const ReductionReport& report);

} // namespace figraph
