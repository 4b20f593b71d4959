#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "figraph/graph.hpp"
#include "figraph/matrix.hpp"

namespace figraph {

struct ClassMetrics {
    double acc = 0.0;
    double micro_f1 = 0.0;
};

/// Argmax class per node from head logits; ties break toward the lowest
/// class index.
std::vector<int> predict_classes(const Mat& z, const Mat& head);

/// Accuracy and micro-F1 (from summed per-class TP/FP/FN) over `eval_set`.
ClassMetrics classify_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels,
                              const std::vector<int>& eval_set);

/// Link probability sigma(z_i . z_j).
double score_edge(std::span<const double> zi, std::span<const double> zj);

struct RankMetrics {
    double auc = 0.0;
    double ap = 0.0;
};

/// AUC with half credit for ties (Mann-Whitney) and average precision with
/// ties broken by stable input order. Needs at least one positive and one
/// negative.
RankMetrics ranking_metrics(const std::vector<double>& scores,
                            const std::vector<std::uint8_t>& is_positive);

/// Scores every listed edge against Z and ranks positives before negatives.
RankMetrics link_prediction_metrics(const Mat& z, const std::vector<Edge>& positives,
                                    const std::vector<Edge>& negatives);

/// One line per node: "node_id v_1 ... v_D" with 9 significant digits.
void export_embeddings(const Mat& z, const std::string& path);

} // namespace figraph
