#pragma once

#include <string>

#include "figraph/config.hpp"
#include "figraph/model.hpp"

namespace figraph {

/// Versioned text checkpoint: a "figraph-checkpoint 1" header, "meta key
/// value" lines, then each tensor as "tensor NAME ROWS COLS" followed by its
/// rows with 17 significant digits (doubles round-trip exactly).
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const KeyValueFile& meta);

struct LoadedCheckpoint {
    ModelParams params;
    KeyValueFile meta;

    /// TrainConfig reconstructed from the stored metadata.
    TrainConfig config() const;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

/// Metadata block describing a trained model (model shape, mode, data
/// dimensions and the split recipe needed to reproduce evaluation).
KeyValueFile checkpoint_meta(const TrainConfig& cfg, int d, int num_classes);

} // namespace figraph
