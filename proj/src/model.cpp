#include "figraph/model.hpp"

#include <cmath>

#include "figraph/error.hpp"

namespace figraph {

void ModelParams::validate(const TrainConfig& cfg, std::size_t d, int num_classes) const {
    aggregator.validate();
    if (aggregator.input_dim() != d)
        throw ShapeError("aggregator input dim vs graph feature dim");
    if (aggregator.output_dim() != cfg.k)
        throw ShapeError("aggregator output dim must equal k (attention query width)");
    if (cfg.factorizer_enabled) {
        if (v.rows != d || v.cols != cfg.k)
            throw ShapeError("V must be d x k");
        if (cfg.attention_enabled && (w_f.rows != cfg.k || w_f.cols != cfg.k))
            throw ShapeError("W_f must be k x k");
    }
    if (cfg.mode == LossMode::semi) {
        if (num_classes < 2) throw ConfigError("semi mode needs at least 2 classes");
        if (head.rows != cfg.z_dim() || head.cols != static_cast<std::size_t>(num_classes))
            throw ShapeError("classifier head must be z_dim x C");
    }
}

ModelParams init_model(const TrainConfig& cfg, std::size_t d, int num_classes, Rng& rng) {
    cfg.validate();
    ModelParams p;
    p.aggregator = init_aggregator(cfg.aggregator, cfg.layer_dims(d), rng);
    if (cfg.factorizer_enabled) {
        p.v = init_factorizer(static_cast<int>(d), cfg.k, rng);
        if (cfg.attention_enabled) p.w_f = init_attention(cfg.k, rng);
    }
    if (cfg.mode == LossMode::semi) {
        const std::size_t zw = cfg.z_dim();
        const auto c = static_cast<std::size_t>(num_classes);
        p.head = Mat(zw, c);
        const double bound = std::sqrt(6.0 / static_cast<double>(zw + c));
        for (double& w : p.head.data) w = rng.uniform(-bound, bound);
    }
    p.validate(cfg, d, num_classes);
    return p;
}

ModelGrads zero_grads_like(const ModelParams& p) {
    ModelGrads g;
    g.aggregator.reserve(p.aggregator.weights.size());
    for (const Mat& w : p.aggregator.weights) g.aggregator.emplace_back(w.rows, w.cols);
    g.v = Mat(p.v.rows, p.v.cols);
    g.w_f = Mat(p.w_f.rows, p.w_f.cols);
    g.head = Mat(p.head.rows, p.head.cols);
    return g;
}

ModelForward model_forward(const SparseGraph& g, const GraphTopology& topo,
                           const ModelParams& p, const TrainConfig& cfg, bool training,
                           Rng& rng) {
    ModelForward fwd;
    fwd.agg = aggregator_forward(g, topo, p.aggregator, cfg.dropout, training,
                                 cfg.relu_last_layer, rng);
    const Mat& h = fwd.agg.final_output();
    const std::size_t n = h.rows;
    const std::size_t k = h.cols;

    if (!cfg.factorizer_enabled) {
        fwd.z = h;
        return fwd;
    }

    fwd.f = Mat(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const InteractionSet inter = factorize_node(g.features[i], p.v, cfg.nnz_cap);
        const AttendResult att = attend(h.row(i), inter, p.w_f, cfg.attention_enabled);
        double* frow = fwd.f.data.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) frow[c] = att.f[c];
    }

    fwd.z = Mat(n, 2 * k);
    for (std::size_t i = 0; i < n; ++i) {
        double* zrow = fwd.z.data.data() + i * fwd.z.cols;
        const double* hrow = h.data.data() + i * k;
        const double* frow = fwd.f.data.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) zrow[c] = hrow[c];
        for (std::size_t c = 0; c < k; ++c) zrow[k + c] = frow[c];
    }
    return fwd;
}

ModelGrads model_backward(const SparseGraph& g, const GraphTopology& topo,
                          const ModelParams& p, const TrainConfig& cfg,
                          const ModelForward& fwd, const Mat& dz) {
    const Mat& h = fwd.h();
    const std::size_t n = h.rows;
    const std::size_t k = h.cols;
    if (dz.rows != n || dz.cols != fwd.z.cols)
        throw ShapeError("model_backward: dz shape mismatch");

    ModelGrads grads = zero_grads_like(p);

    Mat dh(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) dh(i, c) = dz(i, c);

    if (cfg.factorizer_enabled) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* dfrow = dz.data.data() + i * dz.cols + k;
            bool live = false;
            for (std::size_t c = 0; c < k; ++c)
                if (dfrow[c] != 0.0) {
                    live = true;
                    break;
                }
            if (!live) continue;

            // Recompute this node's attention state; cheaper than caching
            // every interaction vector across the graph.
            const std::vector<FeatureEntry> feats = capped_features(g.features[i], cfg.nnz_cap);
            const InteractionSet inter = factorize_node(g.features[i], p.v, cfg.nnz_cap);
            const AttendResult att = attend(h.row(i), inter, p.w_f, cfg.attention_enabled);
            const AttendGrads ag = attend_backward(h.row(i), inter, p.w_f,
                                                   cfg.attention_enabled, att,
                                                   std::span<const double>(dfrow, k), grads.w_f);

            double* dhrow = dh.data.data() + i * k;
            for (std::size_t c = 0; c < k; ++c) dhrow[c] += ag.dh[c];

            // e = (x1 v_j1) (.) (x2 v_j2)  ->  dV rows j1 and j2.
            std::size_t pair = 0;
            for (std::size_t a = 0; a < feats.size(); ++a) {
                const auto [j1, x1] = feats[a];
                const double* v1 = p.v.data.data() + static_cast<std::size_t>(j1) * k;
                double* dv1 = grads.v.data.data() + static_cast<std::size_t>(j1) * k;
                for (std::size_t b = a + 1; b < feats.size(); ++b, ++pair) {
                    const auto [j2, x2] = feats[b];
                    const double* v2 = p.v.data.data() + static_cast<std::size_t>(j2) * k;
                    double* dv2 = grads.v.data.data() + static_cast<std::size_t>(j2) * k;
                    const double* de = ag.d_interactions.data.data() + pair * k;
                    const double scale = x1 * x2;
                    for (std::size_t c = 0; c < k; ++c) {
                        dv1[c] += scale * de[c] * v2[c];
                        dv2[c] += scale * de[c] * v1[c];
                    }
                }
            }
        }
    }

    grads.aggregator = aggregator_backward(topo, p.aggregator, fwd.agg, std::move(dh));
    return grads;
}

} // namespace figraph
