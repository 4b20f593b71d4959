#include "figraph/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "figraph/checkpoint.hpp"
#include "figraph/error.hpp"
#include "figraph/fm_reduction.hpp"
#include "figraph/metrics.hpp"
#include "figraph/synthetic.hpp"

namespace fs = std::filesystem;

namespace figraph {

namespace {

std::string ratios_str(const SplitRatios& r) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", r.train, r.val, r.test);
    return buf;
}

KeyValueFile base_manifest(const std::string& command, const RunOptions& opt) {
    KeyValueFile m;
    m.set("command", command);
    store_config(opt.cfg, m);
    if (opt.config_path) m.set("config_file", *opt.config_path);
    if (!opt.dataset_dir.empty()) m.set("dataset_dir", opt.dataset_dir);
    if (!opt.out_dir.empty()) m.set("out_dir", opt.out_dir);
    m.set("node_ratios", ratios_str(opt.node_ratios));
    m.set("edge_ratios", ratios_str(opt.edge_ratios));
    std::string seeds;
    for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
        if (i) seeds += ',';
        seeds += std::to_string(opt.seeds[i]);
    }
    m.set("seeds", seeds);
    return m;
}

void write_attention_dump(const SparseGraph& g, const ModelParams& params,
                          const TrainConfig& cfg, const Mat& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write attention dump " + path);
    char buf[96];
    for (int i = 0; i < g.n; ++i) {
        const InteractionSet inter = factorize_node(g.features[i], params.v, cfg.nnz_cap);
        const AttendResult att =
            attend(h.row(static_cast<std::size_t>(i)), inter, params.w_f, true);
        for (std::size_t p = 0; p < inter.size(); ++p) {
            std::snprintf(buf, sizeof(buf), "%d %d %d %.9g\n", i, inter.pairs[p].first,
                          inter.pairs[p].second, att.alpha[p]);
            out << buf;
        }
    }
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

} // namespace

SplitRatios parse_split_ratios(const std::string& csv) {
    SplitRatios r;
    if (std::sscanf(csv.c_str(), "%lf,%lf,%lf", &r.train, &r.val, &r.test) != 3)
        throw ConfigError("bad split ratios '" + csv + "'");
    return r;
}

SparseGraph load_dataset_dir(const std::string& dir) {
    const std::string edges = dir + "/edges.txt";
    const std::string features = dir + "/features.txt";
    const std::string labels = dir + "/labels.txt";
    std::optional<std::string> label_path;
    if (fs::exists(labels)) label_path = labels;
    return load_graph(edges, features, label_path);
}

DataSplits make_splits(const SparseGraph& g, const TrainConfig& cfg,
                       const SplitRatios& node_ratios, const SplitRatios& edge_ratios,
                       std::uint64_t seed) {
    if (cfg.mode == LossMode::semi) return split_nodes(g, node_ratios, seed);
    DataSplits splits = split_edges(g, edge_ratios, seed);
    attach_negative_edges(g, splits, Rng(seed).fork(9).seed());
    return splits;
}

SeedOutcome evaluate_trained(const SparseGraph& g, const DataSplits& splits,
                             const TrainConfig& cfg, const TrainResult& result,
                             std::uint64_t seed) {
    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.result = result;

    Rng eval_rng(seed);
    if (cfg.mode == LossMode::semi) {
        const GraphTopology topo = GraphTopology::build(g);
        const ModelForward fwd = model_forward(g, topo, result.params, cfg, false, eval_rng);
        const auto pred = predict_classes(fwd.z, result.params.head);
        std::vector<int> test_labeled;
        for (int i : splits.test_nodes)
            if (g.labels[i] >= 0) test_labeled.push_back(i);
        const ClassMetrics m = classify_metrics(pred, g.labels, test_labeled);
        outcome.metric_a = m.acc;
        outcome.metric_b = m.micro_f1;
    } else {
        const SparseGraph train_g = with_edges(g, splits.train_pos);
        const GraphTopology topo = GraphTopology::build(train_g);
        const ModelForward fwd =
            model_forward(train_g, topo, result.params, cfg, false, eval_rng);
        const RankMetrics m = link_prediction_metrics(fwd.z, splits.test_pos, splits.test_neg);
        outcome.metric_a = m.auc;
        outcome.metric_b = m.ap;
    }
    return outcome;
}

TrainCommandResult cmd_train(const RunOptions& opt) {
    // opt.cfg already carries config-file values with flag overrides applied.
    TrainConfig base_cfg = opt.cfg;
    base_cfg.validate();

    const SparseGraph g = load_dataset_dir(opt.dataset_dir);
    fs::create_directories(opt.out_dir);

    TrainCommandResult all;
    std::vector<double> a_vals, b_vals;

    for (const std::uint64_t seed : opt.seeds) {
        TrainConfig cfg = base_cfg;
        cfg.seed = seed;

        const DataSplits splits = make_splits(g, cfg, opt.node_ratios, opt.edge_ratios, seed);
        const TrainResult result = train(g, splits, cfg);
        SeedOutcome outcome = evaluate_trained(g, splits, cfg, result, seed);

        const std::string seed_dir = opt.out_dir + "/seed_" + std::to_string(seed);
        fs::create_directories(seed_dir);

        KeyValueFile meta = checkpoint_meta(cfg, g.d, g.num_classes);
        meta.set("node_ratios", ratios_str(opt.node_ratios));
        meta.set("edge_ratios", ratios_str(opt.edge_ratios));
        save_checkpoint(seed_dir + "/checkpoint.txt", result.params, meta);

        {
            std::ofstream hist(seed_dir + "/history.txt");
            if (!hist) throw IoError("cannot write history");
            hist << format_history(result.history);
        }
        {
            KeyValueFile metrics;
            metrics.set_uint("seed", seed);
            metrics.set_int("best_epoch", result.best_epoch);
            metrics.set_double("best_val_metric", result.best_val_metric);
            if (cfg.mode == LossMode::semi) {
                metrics.set_double("test_acc", outcome.metric_a);
                metrics.set_double("test_micro_f1", outcome.metric_b);
            } else {
                metrics.set_double("test_auc", outcome.metric_a);
                metrics.set_double("test_ap", outcome.metric_b);
            }
            metrics.write_file(seed_dir + "/metrics.txt");
        }

        if (opt.export_embeddings || opt.dump_attention) {
            const SparseGraph message_graph =
                cfg.mode == LossMode::semi ? g : with_edges(g, splits.train_pos);
            const GraphTopology topo = GraphTopology::build(message_graph);
            Rng eval_rng(seed);
            const ModelForward fwd =
                model_forward(message_graph, topo, result.params, cfg, false, eval_rng);
            if (opt.export_embeddings)
                export_embeddings(fwd.z, seed_dir + "/embeddings.txt");
            if (opt.dump_attention) {
                if (cfg.factorizer_enabled && cfg.attention_enabled)
                    write_attention_dump(message_graph, result.params, cfg, fwd.h(),
                                         seed_dir + "/attention.txt");
                else
                    std::cerr << "warning: attention dump requested but attention is disabled\n";
            }
        }

        a_vals.push_back(outcome.metric_a);
        b_vals.push_back(outcome.metric_b);
        all.outcomes.push_back(std::move(outcome));
    }

    all.mean_a = mean_of(a_vals);
    all.std_a = std_of(a_vals);
    all.mean_b = mean_of(b_vals);
    all.std_b = std_of(b_vals);

    const bool semi = base_cfg.mode == LossMode::semi;
    const char* name_a = semi ? "acc" : "auc";
    const char* name_b = semi ? "micro_f1" : "ap";
    {
        KeyValueFile agg;
        for (const SeedOutcome& o : all.outcomes) {
            agg.set_double("seed_" + std::to_string(o.seed) + "_" + name_a, o.metric_a);
            agg.set_double("seed_" + std::to_string(o.seed) + "_" + name_b, o.metric_b);
        }
        agg.set_double(std::string("mean_") + name_a, all.mean_a);
        agg.set_double(std::string("std_") + name_a, all.std_a);
        agg.set_double(std::string("mean_") + name_b, all.mean_b);
        agg.set_double(std::string("std_") + name_b, all.std_b);
        agg.write_file(opt.out_dir + "/metrics.txt");
    }
    base_manifest("train", opt).write_file(opt.out_dir + "/manifest.txt");

    std::printf("trained %zu seed(s): mean %s %.4f (std %.4f), mean %s %.4f (std %.4f)\n",
                all.outcomes.size(), name_a, all.mean_a, all.std_a, name_b, all.mean_b,
                all.std_b);
    return all;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_dir,
                 const std::string& out_dir) {
    const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const TrainConfig cfg = loaded.config();
    const SparseGraph g = load_dataset_dir(dataset_dir);

    const SplitRatios node_ratios = parse_split_ratios(loaded.meta.get_or("node_ratios", "0.1,0.2,0.7"));
    const SplitRatios edge_ratios = parse_split_ratios(loaded.meta.get_or("edge_ratios", "0.8,0.1,0.1"));
    const DataSplits splits = make_splits(g, cfg, node_ratios, edge_ratios, cfg.seed);

    TrainResult pseudo;
    pseudo.params = loaded.params;
    const SeedOutcome outcome = evaluate_trained(g, splits, cfg, pseudo, cfg.seed);

    const bool semi = cfg.mode == LossMode::semi;
    std::printf("%s %.6f\n%s %.6f\n", semi ? "test_acc" : "test_auc", outcome.metric_a,
                semi ? "test_micro_f1" : "test_ap", outcome.metric_b);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        KeyValueFile metrics;
        metrics.set_double(semi ? "test_acc" : "test_auc", outcome.metric_a);
        metrics.set_double(semi ? "test_micro_f1" : "test_ap", outcome.metric_b);
        metrics.write_file(out_dir + "/metrics.txt");

        KeyValueFile manifest;
        manifest.set("command", "evaluate");
        manifest.set("checkpoint", checkpoint_path);
        manifest.set("dataset_dir", dataset_dir);
        store_config(cfg, manifest);
        manifest.write_file(out_dir + "/manifest.txt");
    }
    return 0;
}

int cmd_export_embeddings(const std::string& checkpoint_path, const std::string& dataset_dir,
                          const std::string& out_path) {
    const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const TrainConfig cfg = loaded.config();
    const SparseGraph g = load_dataset_dir(dataset_dir);

    SparseGraph message_graph = g;
    if (cfg.mode == LossMode::unsup) {
        const SplitRatios edge_ratios =
            parse_split_ratios(loaded.meta.get_or("edge_ratios", "0.8,0.1,0.1"));
        const DataSplits splits = split_edges(g, edge_ratios, cfg.seed);
        message_graph = with_edges(g, splits.train_pos);
    }
    const GraphTopology topo = GraphTopology::build(message_graph);
    Rng eval_rng(cfg.seed);
    const ModelForward fwd =
        model_forward(message_graph, topo, loaded.params, cfg, false, eval_rng);
    export_embeddings(fwd.z, out_path);
    std::printf("wrote %d embeddings of width %zu to %s\n", g.n, fwd.z.cols, out_path.c_str());
    return 0;
}

int cmd_check_gradients(std::uint64_t seed, const std::string& out_dir) {
    struct Combo {
        AggregatorKind kind;
        bool attention;
        LossMode mode;
    };
    std::vector<Combo> combos;
    for (AggregatorKind kind : {AggregatorKind::gcn, AggregatorKind::sage_mean})
        for (bool attention : {true, false})
            for (LossMode mode : {LossMode::semi, LossMode::unsup})
                combos.push_back({kind, attention, mode});

    std::string full_report;
    bool all_pass = true;
    double worst = 0.0;
    for (const Combo& combo : combos) {
        TrainConfig cfg;
        cfg.aggregator = combo.kind;
        cfg.attention_enabled = combo.attention;
        cfg.mode = combo.mode;
        cfg.k = 4;
        cfg.hidden_dims = {8};
        cfg.seed = seed;

        const FdReport report = finite_difference_check(cfg, seed, 10, 12);
        char head[128];
        std::snprintf(head, sizeof(head), "%s / attention %s / %s\n", to_string(combo.kind),
                      combo.attention ? "on" : "off", to_string(combo.mode));
        full_report += head;
        full_report += format_fd_report(report);
        all_pass = all_pass && report.pass();
        worst = std::max(worst, report.max_rel_err);
    }
    char tail[96];
    std::snprintf(tail, sizeof(tail), "check-gradients: worst %.3e -> %s\n", worst,
                  all_pass ? "pass" : "FAIL");
    full_report += tail;
    std::fputs(full_report.c_str(), stdout);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(out_dir + "/gradient_check.txt");
        out << full_report;
        KeyValueFile manifest;
        manifest.set("command", "check-gradients");
        manifest.set_uint("seed", seed);
        manifest.write_file(out_dir + "/manifest.txt");
    }
    return all_pass ? 0 : 1;
}

int cmd_verify_fm_reduction(std::size_t trials, std::uint64_t seed, const std::string& out_dir) {
    const ReductionReport report = verify_reduction(trials, seed);
    const std::string text = format_reduction_report(report);
    std::fputs(text.c_str(), stdout);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(out_dir + "/fm_reduction.txt");
        out << text;
        KeyValueFile manifest;
        manifest.set("command", "verify-fm-reduction");
        manifest.set_uint("seed", seed);
        manifest.set_uint("trials", trials);
        manifest.write_file(out_dir + "/manifest.txt");
    }
    return report.pass() ? 0 : 1;
}

int cmd_make_synthetic(const std::string& kind, int nodes, std::uint64_t seed,
                       const std::string& out_dir) {
    SparseGraph g;
    if (kind == "planted")
        g = make_planted_graph(nodes, seed);
    else if (kind == "blocks")
        g = make_two_block_graph(nodes, 0.3, 0.02, seed);
    else
        throw ConfigError("unknown synthetic kind '" + kind + "' (planted or blocks)");

    write_graph_files(g, out_dir);
    KeyValueFile manifest;
    manifest.set("command", "make-synthetic");
    manifest.set("kind", kind);
    manifest.set_int("nodes", nodes);
    manifest.set_uint("seed", seed);
    manifest.write_file(out_dir + "/manifest.txt");
    std::printf("wrote %s dataset: n=%d m=%zu d=%d C=%d -> %s\n", kind.c_str(), g.n,
                g.num_edges(), g.d, g.num_classes, out_dir.c_str());
    return 0;
}

} // namespace figraph
