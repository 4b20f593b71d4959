#include "figraph/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "figraph/error.hpp"
#include "figraph/metrics.hpp"

namespace figraph {

namespace {

constexpr double kLogFloor = 1e-12;

// Stable log sigma(x) = -softplus(-x), floored at log(1e-12).
double log_sigmoid_floored(double x, bool* floored = nullptr) {
    const double raw = x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    const double floor = std::log(kLogFloor);
    if (floored) *floored = raw < floor;
    return std::max(raw, floor);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// softmax(head^T z_l); returns the probability vector.
std::vector<double> node_class_probs(const Mat& z, const Mat& head, std::size_t node) {
    std::vector<double> logits(head.cols, 0.0);
    for (std::size_t r = 0; r < head.rows; ++r) {
        const double zv = z(node, r);
        if (zv == 0.0) continue;
        const double* hrow = head.data.data() + r * head.cols;
        for (std::size_t c = 0; c < head.cols; ++c) logits[c] += zv * hrow[c];
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double& l : logits) {
        l = std::exp(l - peak);
        denom += l;
    }
    for (double& l : logits) l /= denom;
    return logits;
}

} // namespace

double semi_loss(const Mat& z, const Mat& head, const std::vector<int>& labeled,
                 const std::vector<int>& labels) {
    if (labeled.empty()) throw ConfigError("semi_loss: empty labeled set");
    if (z.cols != head.rows) throw ShapeError("semi_loss: z width vs head rows");
    const auto c = static_cast<double>(head.cols);
    double loss = 0.0;
    for (int l : labeled) {
        const int y = labels[l];
        if (y < 0 || y >= static_cast<int>(head.cols))
            throw ConfigError("semi_loss: node " + std::to_string(l) + " has no valid label");
        const auto probs = node_class_probs(z, head, static_cast<std::size_t>(l));
        const double term = -std::log(std::max(probs[static_cast<std::size_t>(y)], kLogFloor));
        if (!std::isfinite(term))
            throw NumericError("semi_loss: non-finite term at node " + std::to_string(l));
        loss += term;
    }
    return loss / c;
}

double semi_loss_grad(const Mat& z, const Mat& head, const std::vector<int>& labeled,
                      const std::vector<int>& labels, Mat& dz, Mat& dhead) {
    if (labeled.empty()) throw ConfigError("semi_loss: empty labeled set");
    dz = Mat(z.rows, z.cols);
    dhead = Mat(head.rows, head.cols);
    const auto c = static_cast<double>(head.cols);
    const double inv_c = 1.0 / c;
    double loss = 0.0;
    for (int l : labeled) {
        const int y = labels[l];
        if (y < 0 || y >= static_cast<int>(head.cols))
            throw ConfigError("semi_loss: node " + std::to_string(l) + " has no valid label");
        const auto node = static_cast<std::size_t>(l);
        auto probs = node_class_probs(z, head, node);
        const double py = probs[static_cast<std::size_t>(y)];
        const double term = -std::log(std::max(py, kLogFloor));
        if (!std::isfinite(term))
            throw NumericError("semi_loss: non-finite term at node " + std::to_string(l));
        loss += term;
        if (py < kLogFloor) continue; // flat region of the floored log

        // dL/dlogit = (p - onehot_y) / C
        for (std::size_t cc = 0; cc < head.cols; ++cc) {
            double dlogit = probs[cc] * inv_c;
            if (static_cast<int>(cc) == y) dlogit -= inv_c;
            if (dlogit == 0.0) continue;
            for (std::size_t r = 0; r < head.rows; ++r) {
                dhead(r, cc) += z(node, r) * dlogit;
                dz(node, r) += head(r, cc) * dlogit;
            }
        }
    }
    return loss * inv_c;
}

double unsup_loss(const Mat& z, const std::vector<Edge>& positives,
                  const std::vector<Edge>& negatives) {
    if (positives.empty()) throw ConfigError("unsup_loss: empty positive edge set");
    double loss = 0.0;
    for (const Edge& e : positives) {
        const double term = -log_sigmoid_floored(dot(z.row(e.u), z.row(e.v)));
        if (!std::isfinite(term))
            throw NumericError("unsup_loss: non-finite positive term at edge " +
                               std::to_string(e.u) + "-" + std::to_string(e.v));
        loss += term;
    }
    for (const Edge& e : negatives) {
        const double term = -log_sigmoid_floored(-dot(z.row(e.u), z.row(e.v)));
        if (!std::isfinite(term))
            throw NumericError("unsup_loss: non-finite negative term at edge " +
                               std::to_string(e.u) + "-" + std::to_string(e.v));
        loss += term;
    }
    return loss;
}

double unsup_loss_grad(const Mat& z, const std::vector<Edge>& positives,
                       const std::vector<Edge>& negatives, Mat& dz) {
    if (positives.empty()) throw ConfigError("unsup_loss: empty positive edge set");
    dz = Mat(z.rows, z.cols);
    double loss = 0.0;
    bool floored = false;
    for (const Edge& e : positives) {
        const double s = dot(z.row(e.u), z.row(e.v));
        loss -= log_sigmoid_floored(s, &floored);
        if (floored) continue;
        const double coeff = sigmoid(s) - 1.0; // d(-log sigma(s))/ds
        for (std::size_t c = 0; c < z.cols; ++c) {
            dz(e.u, c) += coeff * z(e.v, c);
            dz(e.v, c) += coeff * z(e.u, c);
        }
    }
    for (const Edge& e : negatives) {
        const double s = dot(z.row(e.u), z.row(e.v));
        loss -= log_sigmoid_floored(-s, &floored);
        if (floored) continue;
        const double coeff = sigmoid(s); // d(-log sigma(-s))/ds
        for (std::size_t c = 0; c < z.cols; ++c) {
            dz(e.u, c) += coeff * z(e.v, c);
            dz(e.v, c) += coeff * z(e.u, c);
        }
    }
    if (!std::isfinite(loss)) throw NumericError("unsup_loss: non-finite loss");
    return loss;
}

namespace {

// Parameters and their gradients as parallel flat lists, aggregator weights
// first, then V, W_f, head (empty tensors included to keep indices aligned).
std::vector<Mat*> tensor_list(ModelParams& p) {
    std::vector<Mat*> out;
    for (Mat& w : p.aggregator.weights) out.push_back(&w);
    out.push_back(&p.v);
    out.push_back(&p.w_f);
    out.push_back(&p.head);
    return out;
}

std::vector<const Mat*> tensor_list(const ModelParams& p) {
    std::vector<const Mat*> out;
    for (const Mat& w : p.aggregator.weights) out.push_back(&w);
    out.push_back(&p.v);
    out.push_back(&p.w_f);
    out.push_back(&p.head);
    return out;
}

std::vector<const Mat*> tensor_list(const ModelGrads& g) {
    std::vector<const Mat*> out;
    for (const Mat& w : g.aggregator) out.push_back(&w);
    out.push_back(&g.v);
    out.push_back(&g.w_f);
    out.push_back(&g.head);
    return out;
}

} // namespace

AdamState init_adam(const ModelParams& p) {
    AdamState s;
    for (const Mat* t : tensor_list(p)) {
        s.m.emplace_back(t->rows, t->cols);
        s.v.emplace_back(t->rows, t->cols);
    }
    return s;
}

void adam_update_tensor(Mat& param, const Mat& grad, Mat& m, Mat& v, long t, double lr,
                        double beta1, double beta2, double eps) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
        throw ShapeError("adam_update_tensor: shape mismatch");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.data.size(); ++i) {
        const double g = grad.data[i];
        m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
        v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
        const double m_hat = m.data[i] / bc1;
        const double v_hat = v.data[i] / bc2;
        param.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

void adam_step(ModelParams& p, const ModelGrads& g, AdamState& s, double lr) {
    const auto params = tensor_list(p);
    const auto grads = tensor_list(g);
    if (params.size() != grads.size() || params.size() != s.m.size())
        throw ShapeError("adam_step: tensor count mismatch");
    ++s.t;
    for (std::size_t i = 0; i < params.size(); ++i)
        adam_update_tensor(*params[i], *grads[i], s.m[i], s.v[i], s.t, lr, s.beta1, s.beta2,
                           s.eps);
}

namespace {

// Labeled subset of a node split; errors when training would see no labels.
std::vector<int> labeled_subset(const SparseGraph& g, const std::vector<int>& nodes,
                                const char* what) {
    std::vector<int> out;
    for (int i : nodes)
        if (g.labels[i] >= 0) out.push_back(i);
    if (out.empty()) throw ConfigError(std::string(what) + ": no labeled nodes in split");
    return out;
}

} // namespace

TrainResult train(const SparseGraph& g, const DataSplits& splits, const TrainConfig& cfg) {
    cfg.validate();
    const Rng base(cfg.seed);
    Rng init_rng = base.fork(1);

    const bool semi = cfg.mode == LossMode::semi;
    std::vector<int> train_labeled, val_labeled;
    SparseGraph message_graph;
    if (semi) {
        if (!g.has_labels()) throw ConfigError("train: semi mode requires labels");
        if (splits.train_nodes.empty() || splits.val_nodes.empty())
            throw ConfigError("train: semi mode requires node splits");
        train_labeled = labeled_subset(g, splits.train_nodes, "train split");
        val_labeled = labeled_subset(g, splits.val_nodes, "validation split");
        message_graph = g;
    } else {
        if (splits.train_pos.empty() || splits.val_pos.empty() || splits.val_neg.empty())
            throw ConfigError("train: unsup mode requires edge splits with negatives");
        // Validation and test edges stay hidden from message passing.
        message_graph = with_edges(g, splits.train_pos);
    }
    const GraphTopology topo = GraphTopology::build(message_graph);

    ModelParams params = init_model(cfg, static_cast<std::size_t>(g.d),
                                    semi ? g.num_classes : 0, init_rng);
    AdamState adam = init_adam(params);

    // Per-epoch negative resampling avoids the full positive set and the
    // fixed evaluation negatives.
    std::vector<Edge> protected_negatives;
    if (!semi) {
        protected_negatives = splits.val_neg;
        protected_negatives.insert(protected_negatives.end(), splits.test_neg.begin(),
                                   splits.test_neg.end());
    }

    TrainResult result;
    result.params = params;
    result.best_val_metric = -std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng dropout_rng = base.fork(0x100 + static_cast<std::uint64_t>(epoch));

        ModelForward fwd = model_forward(message_graph, topo, params, cfg, true, dropout_rng);

        double loss = 0.0;
        Mat dz, dhead;
        std::vector<Edge> epoch_negatives;
        if (semi) {
            loss = semi_loss_grad(fwd.z, params.head, train_labeled, g.labels, dz, dhead);
        } else {
            const Rng neg_rng = base.fork(0x10000 + static_cast<std::uint64_t>(epoch));
            epoch_negatives = sample_negative_edges(g, splits.train_pos.size(),
                                                    protected_negatives, neg_rng.seed());
            loss = unsup_loss_grad(fwd.z, splits.train_pos, epoch_negatives, dz);
        }

        ModelGrads grads = model_backward(message_graph, topo, params, cfg, fwd, dz);
        if (semi) grads.head = std::move(dhead);
        adam_step(params, grads, adam, cfg.lr);

        // Deterministic evaluation pass with the updated parameters.
        Rng eval_rng = base.fork(2);
        const ModelForward eval_fwd =
            model_forward(message_graph, topo, params, cfg, false, eval_rng);
        double val_metric = 0.0;
        if (semi) {
            const auto pred = predict_classes(eval_fwd.z, params.head);
            val_metric = classify_metrics(pred, g.labels, val_labeled).acc;
        } else {
            val_metric = link_prediction_metrics(eval_fwd.z, splits.val_pos, splits.val_neg).auc;
        }

        result.history.push_back({epoch, loss, val_metric});
        if (val_metric > result.best_val_metric) {
            result.best_val_metric = val_metric;
            result.best_epoch = epoch;
            result.params = params;
            epochs_since_best = 0;
        } else if (++epochs_since_best >= cfg.patience) {
            break;
        }
    }
    return result;
}

std::string format_history(const std::vector<EpochRecord>& history) {
    std::string out;
    char buf[96];
    for (const EpochRecord& r : history) {
        std::snprintf(buf, sizeof(buf), "%d %.9g %.9g\n", r.epoch, r.loss, r.val_metric);
        out += buf;
    }
    return out;
}

double fd_max_rel_err(const std::function<double()>& loss, Mat& tensor, const Mat& analytic,
                      double eps) {
    if (!tensor.same_shape(analytic)) throw ShapeError("fd_max_rel_err: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
        const double saved = tensor.data[i];
        tensor.data[i] = saved + eps;
        const double up = loss();
        tensor.data[i] = saved - eps;
        const double down = loss();
        tensor.data[i] = saved;
        const double fd = (up - down) / (2.0 * eps);
        const double a = analytic.data[i];
        const double err = std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-4});
        worst = std::max(worst, err);
    }
    return worst;
}

namespace {

// Small random instance for the gradient check: a connected-ish graph with
// sparse real-valued features and labels over 3 classes.
struct FdInstance {
    SparseGraph g;
    GraphTopology topo;
    std::vector<int> labeled;
    std::vector<Edge> positives;
    std::vector<Edge> negatives;
};

FdInstance build_fd_instance(int n, int d, LossMode mode, std::uint64_t seed) {
    Rng rng = Rng(seed).fork(3);
    SparseGraph g;
    g.n = n;
    g.d = d;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.uniform() < 0.35) g.edges.push_back({u, v});
    for (int u = 0; u + 1 < n && g.edges.size() < 3; ++u) g.edges.push_back({u, u + 1});
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

    g.features.resize(n);
    for (int i = 0; i < n; ++i) {
        const int nnz = 2 + static_cast<int>(rng.below(3));
        std::vector<int> idx(d);
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        idx.resize(nnz);
        std::sort(idx.begin(), idx.end());
        for (int j : idx) {
            double v = rng.uniform(-1.5, 1.5);
            if (std::fabs(v) < 0.05) v = v < 0.0 ? -0.05 : 0.05;
            g.features[i].push_back({j, v});
        }
    }

    FdInstance inst;
    if (mode == LossMode::semi) {
        g.num_classes = 3;
        g.labels.resize(n);
        for (int i = 0; i < n; ++i) {
            g.labels[i] = static_cast<int>(rng.below(3));
            inst.labeled.push_back(i);
        }
    } else {
        inst.positives = g.edges;
        inst.negatives =
            sample_negative_edges(g, std::min<std::size_t>(g.edges.size(), 8), {}, seed ^ 0x5eedu);
    }
    g.validate();
    inst.g = std::move(g);
    inst.topo = GraphTopology::build(inst.g);
    return inst;
}

} // namespace

FdReport finite_difference_check(const TrainConfig& cfg, std::uint64_t seed, int n, int d,
                                 double eps) {
    if (n > 20 || d > 16)
        throw ConfigError("finite_difference_check: instance too large (n <= 20, d <= 16)");
    cfg.validate();

    const FdInstance inst = build_fd_instance(n, d, cfg.mode, seed);
    Rng init_rng = Rng(seed).fork(4);
    ModelParams params =
        init_model(cfg, static_cast<std::size_t>(d),
                   cfg.mode == LossMode::semi ? inst.g.num_classes : 0, init_rng);

    // The dropout mask stream restarts from the same state on every
    // evaluation, keeping the loss a smooth function of the parameters.
    const auto loss_of = [&]() {
        Rng mask_rng = Rng(seed).fork(5);
        const ModelForward fwd =
            model_forward(inst.g, inst.topo, params, cfg, true, mask_rng);
        if (cfg.mode == LossMode::semi)
            return semi_loss(fwd.z, params.head, inst.labeled, inst.g.labels);
        return unsup_loss(fwd.z, inst.positives, inst.negatives);
    };

    // Analytic gradients at the current point.
    Mat dz, dhead;
    ModelGrads grads;
    {
        Rng mask_rng = Rng(seed).fork(5);
        const ModelForward fwd =
            model_forward(inst.g, inst.topo, params, cfg, true, mask_rng);
        if (cfg.mode == LossMode::semi)
            semi_loss_grad(fwd.z, params.head, inst.labeled, inst.g.labels, dz, dhead);
        else
            unsup_loss_grad(fwd.z, inst.positives, inst.negatives, dz);
        grads = model_backward(inst.g, inst.topo, params, cfg, fwd, dz);
        if (cfg.mode == LossMode::semi) grads.head = std::move(dhead);
    }

    FdReport report;
    const auto check_group = [&](const std::string& name, Mat& tensor, const Mat& analytic) {
        if (tensor.empty()) return;
        const double err = fd_max_rel_err(loss_of, tensor, analytic, eps);
        report.groups.push_back({name, err});
        report.max_rel_err = std::max(report.max_rel_err, err);
    };

    for (std::size_t l = 0; l < params.aggregator.weights.size(); ++l)
        check_group("W" + std::to_string(l + 1), params.aggregator.weights[l],
                    grads.aggregator[l]);
    check_group("V", params.v, grads.v);
    check_group("W_f", params.w_f, grads.w_f);
    check_group("head", params.head, grads.head);
    return report;
}

std::string format_fd_report(const FdReport& report) {
    std::ostringstream out;
    char buf[96];
    for (const FdGroupResult& g : report.groups) {
        std::snprintf(buf, sizeof(buf), "  %-6s max_rel_err %.3e\n", g.group.c_str(),
                      g.max_rel_err);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  overall %.3e (threshold %.0e) -> %s\n",
                  report.max_rel_err, report.threshold, report.pass() ? "pass" : "FAIL");
    out << buf;
    return out.str();
}

} // namespace figraph
