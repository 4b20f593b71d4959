#include <cmath>
#include <vector>

#include "doctest.h"
#include "figraph/error.hpp"
#include "figraph/metrics.hpp"
#include "figraph/model.hpp"
#include "figraph/rng.hpp"
#include "figraph/synthetic.hpp"
#include "figraph/training.hpp"

using namespace figraph;

namespace {

// 10-node instance shared by several backward tests.
struct SmallInstance {
    SparseGraph g;
    GraphTopology topo;
    TrainConfig cfg;
    ModelParams params;
};

SmallInstance make_instance(LossMode mode, AggregatorKind kind, bool attention,
                            std::uint64_t seed) {
    SmallInstance inst;
    Rng rng(seed);
    SparseGraph& g = inst.g;
    g.n = 10;
    g.d = 6;
    g.features.resize(10);
    for (int u = 0; u < 10; ++u)
        for (int v = u + 1; v < 10; ++v)
            if (rng.uniform() < 0.3) g.edges.push_back({u, v});
    if (g.edges.empty()) g.edges.push_back({0, 1});
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 6; ++j)
            if (rng.uniform() < 0.5) g.features[i].push_back({j, rng.uniform(-1.0, 1.0)});
    if (mode == LossMode::semi) {
        g.num_classes = 3;
        g.labels.resize(10);
        for (int i = 0; i < 10; ++i) g.labels[i] = static_cast<int>(rng.below(3));
    }
    g.validate();
    inst.topo = GraphTopology::build(g);

    inst.cfg.mode = mode;
    inst.cfg.aggregator = kind;
    inst.cfg.attention_enabled = attention;
    inst.cfg.k = 3;
    inst.cfg.hidden_dims = {4};
    inst.cfg.dropout = 0.0;
    inst.params = init_model(inst.cfg, 6, mode == LossMode::semi ? 3 : 0, rng);
    return inst;
}

} // namespace

TEST_CASE("semi_loss frozen values") {
    SUBCASE("one labeled node, uniform over two classes -> ln(2)/2") {
        Mat z(1, 2);            // z = 0 and zero head give uniform probabilities
        const Mat head(2, 2);   // all zeros
        const double loss = semi_loss(z, head, {0}, {0});
        CHECK(loss == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("two labeled nodes, uniform over four classes -> 2 ln(4)/4") {
        Mat z(2, 3);
        const Mat head(3, 4);
        const double loss = semi_loss(z, head, {0, 1}, {2, 1});
        CHECK(loss == doctest::Approx(2.0 * std::log(4.0) / 4.0).epsilon(1e-12));
    }
    SUBCASE("probability one on the true class -> zero loss, zero gradients") {
        Mat z(1, 1);
        z(0, 0) = 1.0;
        Mat head(1, 2);
        head(0, 0) = 60.0; // saturates softmax toward class 0
        head(0, 1) = -60.0;
        const double loss = semi_loss(z, head, {0}, {0});
        CHECK(loss < 1e-12);
        Mat dz, dhead;
        semi_loss_grad(z, head, {0}, {0}, dz, dhead);
        CHECK(max_abs(dz) < 1e-6);
        CHECK(max_abs(dhead) < 1e-6);
    }
    SUBCASE("empty labeled set") {
        Mat z(1, 2);
        Mat head(2, 2);
        CHECK_THROWS_AS(semi_loss(z, head, {}, {}), ConfigError);
    }
}

TEST_CASE("unsup_loss frozen values") {
    SUBCASE("zero representations: every term is ln 2") {
        Mat z(6, 4);
        const std::vector<Edge> pos{{0, 1}, {2, 3}, {4, 5}};
        const std::vector<Edge> neg{{0, 2}, {1, 3}, {2, 4}};
        CHECK(unsup_loss(z, pos, neg) == doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("saturated pairs: loss tends to zero with vanishing gradients") {
        Mat z(4, 1);
        z(0, 0) = 8.0;
        z(1, 0) = 8.0;   // positive pair dot = 64
        z(2, 0) = 8.0;
        z(3, 0) = -8.0;  // negative pair dot = -64
        const std::vector<Edge> pos{{0, 1}};
        const std::vector<Edge> neg{{2, 3}};
        CHECK(unsup_loss(z, pos, neg) < 1e-12);
        Mat dz;
        unsup_loss_grad(z, pos, neg, dz);
        CHECK(max_abs(dz) < 1e-6);
    }
    SUBCASE("single positive with dot ln 3 -> -ln(3/4)") {
        Mat z(2, 1);
        z(0, 0) = std::log(3.0);
        z(1, 0) = 1.0;
        const double loss = unsup_loss(z, {{0, 1}}, {});
        CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
    }
    SUBCASE("empty positives") {
        Mat z(2, 2);
        CHECK_THROWS_AS(unsup_loss(z, {}, {{0, 1}}), ConfigError);
    }
}

TEST_CASE("losses are non-negative on random inputs") {
    Rng rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        Mat z(6, 4), head(4, 3);
        for (double& v : z.data) v = rng.normal(0.0, 3.0);
        for (double& v : head.data) v = rng.normal(0.0, 3.0);
        std::vector<int> labels{0, 1, 2, 0, 1, 2};
        CHECK(semi_loss(z, head, {0, 1, 2, 3, 4, 5}, labels) >= 0.0);
        CHECK(unsup_loss(z, {{0, 1}, {2, 3}}, {{1, 4}, {0, 5}}) >= 0.0);
    }
}

TEST_CASE("adam properties") {
    SUBCASE("first step moves each entry by about -lr * sign(g)") {
        Mat p(2, 2), g(2, 2), m(2, 2), v(2, 2);
        p.fill(1.0);
        g(0, 0) = 0.3;
        g(0, 1) = -2.0;
        g(1, 0) = 1e-3;
        g(1, 1) = -4e-2;
        const double lr = 0.1;
        adam_update_tensor(p, g, m, v, 1, lr, 0.9, 0.999, 1e-8);
        for (std::size_t i = 0; i < 4; ++i) {
            const double moved = p.data[i] - 1.0;
            const double want = -lr * (g.data[i] > 0 ? 1.0 : -1.0);
            CHECK(moved == doctest::Approx(want).epsilon(1e-3));
        }
    }
    SUBCASE("zero gradient leaves parameters unchanged") {
        Mat p(3, 3), g(3, 3), m(3, 3), v(3, 3);
        Rng rng(2);
        for (double& x : p.data) x = rng.normal();
        const Mat before = p;
        adam_update_tensor(p, g, m, v, 1, 0.05, 0.9, 0.999, 1e-8);
        CHECK(max_abs_diff(p, before) == 0.0);
    }
    SUBCASE("mirrored parameters stay mirrored") {
        Mat p1(2, 2), p2(2, 2), g1(2, 2), g2(2, 2), m1(2, 2), v1(2, 2), m2(2, 2), v2(2, 2);
        Rng rng(3);
        for (std::size_t i = 0; i < 4; ++i) {
            p1.data[i] = rng.normal();
            p2.data[i] = -p1.data[i];
            g1.data[i] = rng.normal();
            g2.data[i] = -g1.data[i];
        }
        for (long t = 1; t <= 2; ++t) {
            adam_update_tensor(p1, g1, m1, v1, t, 0.01, 0.9, 0.999, 1e-8);
            adam_update_tensor(p2, g2, m2, v2, t, 0.01, 0.9, 0.999, 1e-8);
        }
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(p2.data[i] == doctest::Approx(-p1.data[i]).epsilon(1e-14));
    }
    SUBCASE("shape mismatch") {
        Mat p(2, 2), g(2, 3), m(2, 2), v(2, 2);
        CHECK_THROWS_AS(adam_update_tensor(p, g, m, v, 1, 0.1, 0.9, 0.999, 1e-8), ShapeError);
    }
}

TEST_CASE("model_backward is linear in dz (doubling the loss doubles gradients)") {
    const SmallInstance inst = make_instance(LossMode::semi, AggregatorKind::gcn, true, 8);
    Rng rng(1);
    const ModelForward fwd = model_forward(inst.g, inst.topo, inst.params, inst.cfg, false, rng);
    Mat dz(fwd.z.rows, fwd.z.cols);
    Rng drng(5);
    for (double& v : dz.data) v = drng.normal();
    const ModelGrads g1 = model_backward(inst.g, inst.topo, inst.params, inst.cfg, fwd, dz);
    Mat dz2 = dz;
    scale_inplace(dz2, 2.0);
    const ModelGrads g2 = model_backward(inst.g, inst.topo, inst.params, inst.cfg, fwd, dz2);
    for (std::size_t l = 0; l < g1.aggregator.size(); ++l)
        for (std::size_t i = 0; i < g1.aggregator[l].data.size(); ++i)
            CHECK(g2.aggregator[l].data[i] ==
                  doctest::Approx(2.0 * g1.aggregator[l].data[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.v.data.size(); ++i)
        CHECK(g2.v.data[i] == doctest::Approx(2.0 * g1.v.data[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.w_f.data.size(); ++i)
        CHECK(g2.w_f.data[i] == doctest::Approx(2.0 * g1.w_f.data[i]).epsilon(1e-12));
}

TEST_CASE("quadratic surrogate: finite differences are near-exact") {
    Rng rng(6);
    Mat p(15, 4);
    for (double& v : p.data) v = rng.uniform(-1.0, 1.0);
    Mat analytic(15, 4);
    for (std::size_t i = 0; i < p.data.size(); ++i) analytic.data[i] = 2.0 * p.data[i];
    const auto loss = [&]() {
        long double acc = 0.0L;
        for (double v : p.data) acc += static_cast<long double>(v) * v;
        return static_cast<double>(acc);
    };
    CHECK(fd_max_rel_err(loss, p, analytic, 1e-3) < 1e-10);
}

TEST_CASE("finite_difference_check passes representative configurations") {
    SUBCASE("gcn semi with attention (with dropout fixed-mask path)") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.aggregator = AggregatorKind::gcn;
        cfg.k = 4;
        cfg.hidden_dims = {8};
        cfg.dropout = 0.1;
        const FdReport r = finite_difference_check(cfg, 12, 10, 12);
        CHECK(r.pass());
        CHECK(r.groups.size() == 5); // W1 W2 V W_f head
    }
    SUBCASE("sage unsup without attention (ablation)") {
        TrainConfig cfg;
        cfg.mode = LossMode::unsup;
        cfg.aggregator = AggregatorKind::sage_mean;
        cfg.attention_enabled = false;
        cfg.k = 4;
        cfg.hidden_dims = {8};
        cfg.dropout = 0.0;
        const FdReport r = finite_difference_check(cfg, 12, 10, 12);
        CHECK(r.pass());
    }
    SUBCASE("three-layer stack") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.k = 3;
        cfg.hidden_dims = {6, 5};
        cfg.dropout = 0.0;
        const FdReport r = finite_difference_check(cfg, 19, 10, 12);
        CHECK(r.pass());
        CHECK(r.groups.size() == 6); // W1 W2 W3 V W_f head
    }
    SUBCASE("instance size limits enforced") {
        TrainConfig cfg;
        CHECK_THROWS_AS(finite_difference_check(cfg, 1, 50, 12), ConfigError);
        CHECK_THROWS_AS(finite_difference_check(cfg, 1, 10, 64), ConfigError);
    }
}

TEST_CASE("train loop mechanics") {
    const SparseGraph g = make_two_block_graph(20, 0.5, 0.05, 3);
    DataSplits splits = split_nodes(g, {0.4, 0.3, 0.3}, 11);

    SUBCASE("lr = 0 with patience: constant loss then early stop at best+patience") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.lr = 1e-30; // one Adam tick of 1e-30 keeps the metric frozen
        cfg.dropout = 0.0;
        cfg.k = 3;
        cfg.hidden_dims = {4};
        cfg.max_epochs = 10;
        cfg.patience = 3;
        cfg.seed = 5;
        const TrainResult r = train(g, splits, cfg);
        REQUIRE(r.history.size() == 4); // epoch 1 best, then 3 stale epochs
        for (const EpochRecord& e : r.history)
            CHECK(e.loss == doctest::Approx(r.history.front().loss).epsilon(1e-9));
    }
    SUBCASE("patience 1 stops at epoch 2 when the metric never improves") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.lr = 1e-30;
        cfg.dropout = 0.0;
        cfg.k = 3;
        cfg.hidden_dims = {4};
        cfg.max_epochs = 50;
        cfg.patience = 1;
        cfg.seed = 5;
        const TrainResult r = train(g, splits, cfg);
        CHECK(r.history.size() == 2);
        CHECK(r.best_epoch == 1);
    }
    SUBCASE("smoke: 200 epochs reduce the training loss") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.k = 4;
        cfg.hidden_dims = {8};
        cfg.max_epochs = 200;
        cfg.patience = 200;
        cfg.seed = 7;
        const TrainResult r = train(g, splits, cfg);
        CHECK(r.history.back().loss < r.history.front().loss);
    }
    SUBCASE("training is bitwise reproducible for a fixed seed") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.k = 3;
        cfg.hidden_dims = {4};
        cfg.max_epochs = 12;
        cfg.patience = 12;
        cfg.seed = 21;
        const TrainResult a = train(g, splits, cfg);
        const TrainResult b = train(g, splits, cfg);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].loss == b.history[i].loss);
            CHECK(a.history[i].val_metric == b.history[i].val_metric);
        }
        for (std::size_t l = 0; l < a.params.aggregator.weights.size(); ++l)
            CHECK(max_abs_diff(a.params.aggregator.weights[l],
                               b.params.aggregator.weights[l]) == 0.0);
        CHECK(max_abs_diff(a.params.v, b.params.v) == 0.0);
    }
    SUBCASE("small steps decrease the loss on at least 95% of epochs") {
        TrainConfig cfg;
        cfg.mode = LossMode::semi;
        cfg.lr = 1e-3;
        cfg.dropout = 0.0;
        cfg.k = 3;
        cfg.hidden_dims = {4};
        cfg.max_epochs = 100;
        cfg.patience = 100;
        cfg.seed = 9;
        const TrainResult r = train(g, splits, cfg);
        int decreases = 0;
        for (std::size_t i = 1; i < r.history.size(); ++i)
            if (r.history[i].loss < r.history[i - 1].loss) ++decreases;
        CHECK(static_cast<double>(decreases) >=
              0.95 * static_cast<double>(r.history.size() - 1));
    }
}

TEST_CASE("unsup training trains and validates on edge splits") {
    const SparseGraph g = make_two_block_graph(40, 0.4, 0.05, 17);
    DataSplits splits = split_edges(g, {0.8, 0.1, 0.1}, 3);
    attach_negative_edges(g, splits, 4);
    TrainConfig cfg;
    cfg.mode = LossMode::unsup;
    cfg.k = 3;
    cfg.hidden_dims = {4};
    cfg.max_epochs = 30;
    cfg.patience = 30;
    cfg.seed = 2;
    const TrainResult r = train(g, splits, cfg);
    CHECK(r.history.size() == 30);
    CHECK(r.best_val_metric > 0.5); // better than chance on validation AUC
    CHECK(r.history.back().loss < r.history.front().loss);
}
