#pragma once

#include <functional>
#include <string>
#include <vector>

#include "figraph/config.hpp"
#include "figraph/graph.hpp"
#include "figraph/model.hpp"

namespace figraph {

/// Cross-entropy over the labeled nodes with the printed 1/C normalization:
/// L = -(1/C) sum_l log softmax(head^T z_l)[y_l]. Probabilities are floored
/// at 1e-12 inside the log.
double semi_loss(const Mat& z, const Mat& head, const std::vector<int>& labeled,
                 const std::vector<int>& labels);

/// Same value, plus gradients w.r.t. Z (accumulated into dz) and the head.
double semi_loss_grad(const Mat& z, const Mat& head, const std::vector<int>& labeled,
                      const std::vector<int>& labels, Mat& dz, Mat& dhead);

/// Negative-sampling link loss:
/// L = -sum_pos log sigma(z_i . z_j) - sum_neg log sigma(-z_i . z_k),
/// with the log argument floored at 1e-12.
double unsup_loss(const Mat& z, const std::vector<Edge>& positives,
                  const std::vector<Edge>& negatives);

double unsup_loss_grad(const Mat& z, const std::vector<Edge>& positives,
                       const std::vector<Edge>& negatives, Mat& dz);

/// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
struct AdamState {
    std::vector<Mat> m;
    std::vector<Mat> v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState init_adam(const ModelParams& p);
void adam_step(ModelParams& p, const ModelGrads& g, AdamState& s, double lr);

/// Single-tensor update, shared by adam_step and usable directly in tests.
void adam_update_tensor(Mat& param, const Mat& grad, Mat& m, Mat& v, long t, double lr,
                        double beta1, double beta2, double eps);

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double val_metric = 0.0;
};

struct TrainResult {
    ModelParams params; // best-validation snapshot
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_val_metric = 0.0;
};

/// Full-batch training with early stopping on the validation metric (ACC in
/// semi mode, AUC in unsup mode). In unsup mode message passing sees only the
/// training edges and the per-epoch negatives are resampled. Bitwise
/// reproducible for a fixed seed.
TrainResult train(const SparseGraph& g, const DataSplits& splits, const TrainConfig& cfg);

/// "epoch loss val_metric" lines.
std::string format_history(const std::vector<EpochRecord>& history);

/// Central-difference gradient check of one tensor against its analytic
/// gradient. `loss` is re-evaluated with single entries of `tensor` nudged by
/// +-eps; the tensor is restored afterwards. Returns the max relative error
/// (tiny magnitudes are compared against a 1e-4 scale instead).
double fd_max_rel_err(const std::function<double()>& loss, Mat& tensor, const Mat& analytic,
                      double eps);

struct FdGroupResult {
    std::string group;
    double max_rel_err = 0.0;
};

struct FdReport {
    std::vector<FdGroupResult> groups;
    double max_rel_err = 0.0;
    double threshold = 1e-4;

    bool pass() const { return max_rel_err < threshold; }
};

/// Builds a small random instance (n nodes, d features) from `seed`, runs one
/// analytic backward pass and compares every parameter group against central
/// finite differences at 64-bit precision. Dropout, when enabled, uses a
/// fixed mask stream so the loss stays a deterministic function of the
/// parameters. Enforces n <= 20 and d <= 16.
FdReport finite_difference_check(const TrainConfig& cfg, std::uint64_t seed, int n = 10,
                                 int d = 12, double eps = 1e-5);

std::string format_fd_report(const FdReport& report);

} // namespace figraph
