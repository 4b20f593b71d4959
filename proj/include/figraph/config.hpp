#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "figraph/aggregator.hpp"

namespace figraph {

enum class LossMode { semi, unsup };

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

/// Every knob of a training run. Defaults: lr 0.005, dropout 0.1, at most
/// 200 epochs, two GCN layers 32/16, interaction embedding size 16.
struct TrainConfig {
    double lr = 0.005;
    double dropout = 0.1;
    int max_epochs = 200;
    int patience = 10;
    std::size_t k = 16;
    std::vector<std::size_t> hidden_dims{32};
    LossMode mode = LossMode::semi;
    AggregatorKind aggregator = AggregatorKind::gcn;
    bool attention_enabled = true;
    bool factorizer_enabled = true;
    bool relu_last_layer = true;
    std::size_t nnz_cap = 0; // 0 = no cap on per-node non-zeros in the factorizer
    std::uint64_t seed = 1;

    void validate() const;

    /// Aggregator width chain for a graph with feature dimension d.
    std::vector<std::size_t> layer_dims(std::size_t d) const;

    /// Width of the fused representation z.
    std::size_t z_dim() const { return factorizer_enabled ? 2 * k : k; }
};

/// Flat "key value" text config (one pair per line, '#' comments). The same
/// format serves as config file, run manifest and checkpoint metadata.
class KeyValueFile {
public:
    KeyValueFile() = default;

    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, long long value);
    void set_uint(const std::string& key, std::uint64_t value);
    void set_bool(const std::string& key, bool value);

    std::string get(const std::string& key) const; // throws ConfigError if missing
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    /// Keys sorted, one "key value" line each.
    std::string serialize() const;
    void write_file(const std::string& path) const;

private:
    std::map<std::string, std::string> values_;
};

/// Applies any recognized keys from a key-value file onto a TrainConfig.
void apply_config(TrainConfig& cfg, const KeyValueFile& kv);

/// Serializes the full TrainConfig into a key-value file.
void store_config(const TrainConfig& cfg, KeyValueFile& kv);

std::vector<std::uint64_t> parse_seed_list(const std::string& csv);
std::vector<std::size_t> parse_dim_list(const std::string& csv);
std::string format_dim_list(const std::vector<std::size_t>& dims);

} // namespace figraph
