#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "figraph/config.hpp"
#include "figraph/graph.hpp"
#include "figraph/model.hpp"
#include "figraph/training.hpp"

namespace figraph {

/// Options shared by the dataset-driven subcommands. Defaults follow the
/// 10/20/70 node split and 80/10/10 edge split.
struct RunOptions {
    std::string dataset_dir;
    std::string out_dir;
    std::optional<std::string> config_path;
    TrainConfig cfg;
    std::vector<std::uint64_t> seeds{1};
    SplitRatios node_ratios{0.1, 0.2, 0.7};
    SplitRatios edge_ratios{0.8, 0.1, 0.1};
    bool export_embeddings = false;
    bool dump_attention = false;
};

/// Per-seed training outcome, kept so callers (tests, aggregation) can
/// inspect results without re-reading files.
struct SeedOutcome {
    std::uint64_t seed = 0;
    TrainResult result;
    double metric_a = 0.0; // ACC or AUC
    double metric_b = 0.0; // micro-F1 or AP
};

struct TrainCommandResult {
    std::vector<SeedOutcome> outcomes;
    double mean_a = 0.0, std_a = 0.0;
    double mean_b = 0.0, std_b = 0.0;
};

/// Loads a dataset directory (edges.txt, features.txt, optional labels.txt).
SparseGraph load_dataset_dir(const std::string& dir);

/// "0.1,0.2,0.7" -> SplitRatios.
SplitRatios parse_split_ratios(const std::string& csv);

/// Builds the splits a run with this seed uses (node split for semi mode,
/// edge split with negatives for unsup mode).
DataSplits make_splits(const SparseGraph& g, const TrainConfig& cfg,
                       const SplitRatios& node_ratios, const SplitRatios& edge_ratios,
                       std::uint64_t seed);

/// Test-set metrics of trained parameters under the run's protocol.
SeedOutcome evaluate_trained(const SparseGraph& g, const DataSplits& splits,
                             const TrainConfig& cfg, const TrainResult& result,
                             std::uint64_t seed);

/// `train`: fit per seed, write checkpoint/history/metrics per seed plus an
/// aggregate report and the run manifest.
TrainCommandResult cmd_train(const RunOptions& opt);

/// `evaluate`: metrics of a stored checkpoint on its dataset/split.
int cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_dir,
                 const std::string& out_dir);

/// `export-embeddings`: eval-mode fused representations of every node.
int cmd_export_embeddings(const std::string& checkpoint_path, const std::string& dataset_dir,
                          const std::string& out_path);

/// `check-gradients`: finite-difference verification over both aggregators,
/// attention on/off and both losses. Returns nonzero when any group fails.
int cmd_check_gradients(std::uint64_t seed, const std::string& out_dir);

/// `verify-fm-reduction`.
int cmd_verify_fm_reduction(std::size_t trials, std::uint64_t seed,
                            const std::string& out_dir);

/// `make-synthetic`: writes a generated fixture as a dataset directory.
int cmd_make_synthetic(const std::string& kind, int nodes, std::uint64_t seed,
                       const std::string& out_dir);

} // namespace figraph
