#include "figraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "figraph/error.hpp"

namespace figraph {

std::vector<int> predict_classes(const Mat& z, const Mat& head) {
    if (z.cols != head.rows) throw ShapeError("predict_classes: z width vs head rows");
    std::vector<int> out(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < head.cols; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < head.rows; ++r) s += z(i, r) * head(r, c);
            if (s > best_score) {
                best_score = s;
                best = static_cast<int>(c);
            }
        }
        out[i] = best;
    }
    return out;
}

ClassMetrics classify_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels,
                              const std::vector<int>& eval_set) {
    if (eval_set.empty()) throw ConfigError("classify_metrics: empty evaluation set");
    int num_classes = 0;
    for (int i : eval_set) {
        num_classes = std::max(num_classes, labels[i] + 1);
        num_classes = std::max(num_classes, predictions[i] + 1);
    }
    std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    long correct = 0;
    for (int i : eval_set) {
        const int y = labels[i];
        const int p = predictions[i];
        if (y < 0) throw ConfigError("classify_metrics: unlabeled node in evaluation set");
        if (p == y) {
            ++tp[y];
            ++correct;
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    const double tp_sum = static_cast<double>(std::accumulate(tp.begin(), tp.end(), 0L));
    const double fp_sum = static_cast<double>(std::accumulate(fp.begin(), fp.end(), 0L));
    const double fn_sum = static_cast<double>(std::accumulate(fn.begin(), fn.end(), 0L));
    ClassMetrics m;
    m.acc = static_cast<double>(correct) / static_cast<double>(eval_set.size());
    const double denom = 2.0 * tp_sum + fp_sum + fn_sum;
    m.micro_f1 = denom == 0.0 ? 0.0 : 2.0 * tp_sum / denom;
    return m;
}

double score_edge(std::span<const double> zi, std::span<const double> zj) {
    const double s = dot(zi, zj);
    return 1.0 / (1.0 + std::exp(-s));
}

RankMetrics ranking_metrics(const std::vector<double>& scores,
                            const std::vector<std::uint8_t>& is_positive) {
    if (scores.size() != is_positive.size())
        throw ShapeError("ranking_metrics: scores vs flags length");
    const std::size_t total = scores.size();
    std::size_t positives = 0;
    for (std::uint8_t f : is_positive) positives += f ? 1 : 0;
    const std::size_t negatives = total - positives;
    if (positives == 0 || negatives == 0)
        throw ConfigError("ranking_metrics needs at least one positive and one negative");

    // AUC via midranks: (sum of positive ranks - P(P+1)/2) / (P*N) gives the
    // Mann-Whitney statistic with half credit for ties.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(total);
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j + 1 < total && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        if (is_positive[i]) pos_rank_sum += rank[i];
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);

    RankMetrics out;
    out.auc = (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);

    // AP: precision at each positive's rank, descending score, ties kept in
    // input order (stable sort).
    std::vector<std::size_t> desc(total);
    std::iota(desc.begin(), desc.end(), 0);
    std::stable_sort(desc.begin(), desc.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double hits = 0.0;
    double ap_sum = 0.0;
    for (std::size_t r = 0; r < total; ++r) {
        if (!is_positive[desc[r]]) continue;
        hits += 1.0;
        ap_sum += hits / static_cast<double>(r + 1);
    }
    out.ap = ap_sum / p;
    return out;
}

RankMetrics link_prediction_metrics(const Mat& z, const std::vector<Edge>& positives,
                                    const std::vector<Edge>& negatives) {
    std::vector<double> scores;
    std::vector<std::uint8_t> flags;
    scores.reserve(positives.size() + negatives.size());
    flags.reserve(scores.capacity());
    for (const Edge& e : positives) {
        scores.push_back(score_edge(z.row(e.u), z.row(e.v)));
        flags.push_back(1);
    }
    for (const Edge& e : negatives) {
        scores.push_back(score_edge(z.row(e.u), z.row(e.v)));
        flags.push_back(0);
    }
    return ranking_metrics(scores, flags);
}

void export_embeddings(const Mat& z, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write embeddings to " + path);
    char buf[40];
    for (std::size_t i = 0; i < z.rows; ++i) {
        out << i;
        for (std::size_t c = 0; c < z.cols; ++c) {
            std::snprintf(buf, sizeof(buf), " %.9g", z(i, c));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing embeddings to " + path);
}

} // namespace figraph
