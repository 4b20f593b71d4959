// figraph: feature-interaction-aware graph representation learning.
//
// Subcommands: train, evaluate, export-embeddings, check-gradients,
// verify-fm-reduction, make-synthetic.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "figraph/commands.hpp"
#include "figraph/error.hpp"

using namespace figraph;

int main(int argc, char** argv) {
    CLI::App app{"feature-interaction-aware graph representation learning"};
    app.require_subcommand(1);

    // --- train -----------------------------------------------------------
    RunOptions train_opt;
    std::string train_mode = "semi", train_agg = "gcn", train_seeds = "1";
    std::string train_hidden, train_node_split, train_edge_split, train_config;
    bool no_attention = false, no_factorizer = false;

    CLI::App* train = app.add_subcommand("train", "fit a model and write checkpoints");
    train->add_option("--dataset-dir", train_opt.dataset_dir,
                      "directory with edges.txt/features.txt[/labels.txt] (or via --config)");
    train->add_option("--out", train_opt.out_dir, "output directory")->required();
    train->add_option("--config", train_config, "key-value config file");
    train->add_option("--mode", train_mode, "semi | unsup");
    train->add_option("--aggregator", train_agg, "gcn | sage");
    train->add_flag("--no-attention", no_attention, "disable personalized attention (unweighted interaction sum)");
    train->add_flag("--no-factorizer", no_factorizer, "disable the feature factorizer (plain GNN baseline)");
    train->add_option("--lr", train_opt.cfg.lr, "learning rate");
    train->add_option("--dropout", train_opt.cfg.dropout, "dropout rate");
    train->add_option("--max-epochs", train_opt.cfg.max_epochs, "epoch cap");
    train->add_option("--patience", train_opt.cfg.patience, "early-stopping patience");
    train->add_option("--k", train_opt.cfg.k, "interaction embedding size");
    train->add_option("--hidden-dims", train_hidden, "comma-separated hidden widths");
    train->add_option("--nnz-cap", train_opt.cfg.nnz_cap, "per-node non-zero cap (0 = none)");
    train->add_option("--seed", train_seeds, "single seed");
    train->add_option("--seeds", train_seeds, "comma-separated seeds");
    train->add_option("--node-split", train_node_split, "train,val,test node ratios");
    train->add_option("--edge-split", train_edge_split, "train,val,test edge ratios");
    train->add_flag("--export-embeddings", train_opt.export_embeddings, "write embeddings.txt per seed");
    train->add_flag("--dump-attention", train_opt.dump_attention, "write attention.txt per seed");

    // --- evaluate ----------------------------------------------------------
    std::string eval_checkpoint, eval_dataset, eval_out;
    CLI::App* evaluate = app.add_subcommand("evaluate", "metrics of a stored checkpoint");
    evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    evaluate->add_option("--dataset-dir", eval_dataset, "dataset directory")->required();
    evaluate->add_option("--out", eval_out, "optional output directory");

    // --- export-embeddings ---------------------------------------------------
    std::string exp_checkpoint, exp_dataset, exp_out;
    CLI::App* exp = app.add_subcommand("export-embeddings", "write fused node representations");
    exp->add_option("--checkpoint", exp_checkpoint, "checkpoint file")->required();
    exp->add_option("--dataset-dir", exp_dataset, "dataset directory")->required();
    exp->add_option("--out", exp_out, "output file")->required();

    // --- check-gradients -----------------------------------------------------
    std::uint64_t grad_seed = 12;
    std::string grad_out;
    CLI::App* grad = app.add_subcommand("check-gradients",
                                        "compare analytic gradients with finite differences");
    grad->add_option("--seed", grad_seed, "instance seed");
    grad->add_option("--out", grad_out, "optional output directory");

    // --- verify-fm-reduction -------------------------------------------------
    std::size_t fm_trials = 1000;
    std::uint64_t fm_seed = 7;
    std::string fm_out;
    CLI::App* fm = app.add_subcommand("verify-fm-reduction",
                                      "check the simplified model against the vanilla FM oracle");
    fm->add_option("--trials", fm_trials, "number of random instances");
    fm->add_option("--seed", fm_seed, "instance seed");
    fm->add_option("--out", fm_out, "optional output directory");

    // --- make-synthetic ------------------------------------------------------
    std::string syn_kind = "planted", syn_out;
    int syn_nodes = 400;
    std::uint64_t syn_seed = 42;
    CLI::App* syn = app.add_subcommand("make-synthetic", "generate a benchmark dataset");
    syn->add_option("--kind", syn_kind, "planted | blocks");
    syn->add_option("--nodes", syn_nodes, "node count");
    syn->add_option("--seed", syn_seed, "generator seed");
    syn->add_option("--out", syn_out, "dataset directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            // Resolution order: defaults, then config file, then flags. A run
            // manifest doubles as a config file, so replaying one restores
            // the dataset, splits and seeds as well.
            TrainConfig cfg;
            if (!train_config.empty()) {
                const KeyValueFile file = KeyValueFile::parse_file(train_config);
                apply_config(cfg, file);
                train_opt.config_path = train_config;
                if (file.has("dataset_dir") && train_opt.dataset_dir.empty())
                    train_opt.dataset_dir = file.get("dataset_dir");
                if (file.has("node_ratios") && train_node_split.empty())
                    train_node_split = file.get("node_ratios");
                if (file.has("edge_ratios") && train_edge_split.empty())
                    train_edge_split = file.get("edge_ratios");
                if (file.has("seeds") && !train->count("--seed") && !train->count("--seeds"))
                    train_seeds = file.get("seeds");
            }
            if (train->count("--lr")) cfg.lr = train_opt.cfg.lr;
            if (train->count("--dropout")) cfg.dropout = train_opt.cfg.dropout;
            if (train->count("--max-epochs")) cfg.max_epochs = train_opt.cfg.max_epochs;
            if (train->count("--patience")) cfg.patience = train_opt.cfg.patience;
            if (train->count("--k")) cfg.k = train_opt.cfg.k;
            if (train->count("--nnz-cap")) cfg.nnz_cap = train_opt.cfg.nnz_cap;
            if (train->count("--mode")) cfg.mode = loss_mode_from_string(train_mode);
            if (train->count("--aggregator")) cfg.aggregator = aggregator_kind_from_string(train_agg);
            if (!train_hidden.empty()) cfg.hidden_dims = parse_dim_list(train_hidden);
            if (no_attention) cfg.attention_enabled = false;
            if (no_factorizer) cfg.factorizer_enabled = false;
            train_opt.cfg = cfg;
            train_opt.seeds = parse_seed_list(train_seeds);
            if (!train_node_split.empty())
                train_opt.node_ratios = parse_split_ratios(train_node_split);
            if (!train_edge_split.empty())
                train_opt.edge_ratios = parse_split_ratios(train_edge_split);
            if (train_opt.dataset_dir.empty())
                throw ConfigError("train needs --dataset-dir (or a config with dataset_dir)");
            cmd_train(train_opt);
            return 0;
        }
        if (evaluate->parsed()) return cmd_evaluate(eval_checkpoint, eval_dataset, eval_out);
        if (exp->parsed()) return cmd_export_embeddings(exp_checkpoint, exp_dataset, exp_out);
        if (grad->parsed()) return cmd_check_gradients(grad_seed, grad_out);
        if (fm->parsed()) return cmd_verify_fm_reduction(fm_trials, fm_seed, fm_out);
        if (syn->parsed()) return cmd_make_synthetic(syn_kind, syn_nodes, syn_seed, syn_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
