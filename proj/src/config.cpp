#include "figraph/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "figraph/error.hpp"

namespace figraph {

const char* to_string(LossMode mode) {
    return mode == LossMode::semi ? "semi" : "unsup";
}

LossMode loss_mode_from_string(const std::string& name) {
    if (name == "semi") return LossMode::semi;
    if (name == "unsup") return LossMode::unsup;
    throw ConfigError("unknown mode '" + name + "' (expected semi or unsup)");
}

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    for (std::size_t h : hidden_dims)
        if (h < 1) throw ConfigError("hidden dims must be >= 1");
}

std::vector<std::size_t> TrainConfig::layer_dims(std::size_t d) const {
    std::vector<std::size_t> dims;
    dims.push_back(d);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(k); // last width doubles as the attention query size
    return dims;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        std::string value;
        std::getline(ss, value);
        const auto start = value.find_first_not_of(" \t");
        const auto end = value.find_last_not_of(" \t\r");
        value = start == std::string::npos ? "" : value.substr(start, end - start + 1);
        if (value.empty())
            throw ParseError("config line " + std::to_string(line_no) + ": missing value for '" +
                             key + "'");
        kv.values_[key] = value;
    }
    return kv;
}

void KeyValueFile::set_double(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    values_[key] = buf;
}

void KeyValueFile::set_int(const std::string& key, long long value) {
    values_[key] = std::to_string(value);
}

void KeyValueFile::set_uint(const std::string& key, std::uint64_t value) {
    values_[key] = std::to_string(value);
}

void KeyValueFile::set_bool(const std::string& key, bool value) {
    values_[key] = value ? "true" : "false";
}

std::string KeyValueFile::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not a number");
    }
}

long long KeyValueFile::get_int(const std::string& key) const {
    try {
        return std::stoll(get(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not an integer");
    }
}

std::uint64_t KeyValueFile::get_uint(const std::string& key) const {
    try {
        return std::stoull(get(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not an unsigned integer");
    }
}

bool KeyValueFile::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "' is not a boolean");
}

std::string KeyValueFile::serialize() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += ' ';
        out += value;
        out += '\n';
    }
    return out;
}

void KeyValueFile::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << serialize();
    if (!out) throw IoError("failed writing " + path);
}

void apply_config(TrainConfig& cfg, const KeyValueFile& kv) {
    if (kv.has("lr")) cfg.lr = kv.get_double("lr");
    if (kv.has("dropout")) cfg.dropout = kv.get_double("dropout");
    if (kv.has("max_epochs")) cfg.max_epochs = static_cast<int>(kv.get_int("max_epochs"));
    if (kv.has("patience")) cfg.patience = static_cast<int>(kv.get_int("patience"));
    if (kv.has("k")) cfg.k = static_cast<std::size_t>(kv.get_int("k"));
    if (kv.has("hidden_dims")) cfg.hidden_dims = parse_dim_list(kv.get("hidden_dims"));
    if (kv.has("mode")) cfg.mode = loss_mode_from_string(kv.get("mode"));
    if (kv.has("aggregator")) cfg.aggregator = aggregator_kind_from_string(kv.get("aggregator"));
    if (kv.has("attention")) cfg.attention_enabled = kv.get_bool("attention");
    if (kv.has("factorizer")) cfg.factorizer_enabled = kv.get_bool("factorizer");
    if (kv.has("relu_last_layer")) cfg.relu_last_layer = kv.get_bool("relu_last_layer");
    if (kv.has("nnz_cap")) cfg.nnz_cap = static_cast<std::size_t>(kv.get_int("nnz_cap"));
    if (kv.has("seed")) cfg.seed = kv.get_uint("seed");
}

void store_config(const TrainConfig& cfg, KeyValueFile& kv) {
    kv.set_double("lr", cfg.lr);
    kv.set_double("dropout", cfg.dropout);
    kv.set_int("max_epochs", cfg.max_epochs);
    kv.set_int("patience", cfg.patience);
    kv.set_int("k", static_cast<long long>(cfg.k));
    kv.set("hidden_dims", format_dim_list(cfg.hidden_dims));
    kv.set("mode", to_string(cfg.mode));
    kv.set("aggregator", to_string(cfg.aggregator));
    kv.set_bool("attention", cfg.attention_enabled);
    kv.set_bool("factorizer", cfg.factorizer_enabled);
    kv.set_bool("relu_last_layer", cfg.relu_last_layer);
    kv.set_int("nnz_cap", static_cast<long long>(cfg.nnz_cap));
    kv.set_uint("seed", cfg.seed);
}

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream ss(csv);
    while (std::getline(ss, token, ','))
        if (!token.empty()) parts.push_back(token);
    return parts;
}

} // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    for (const std::string& tok : split_csv(csv)) {
        try {
            seeds.push_back(std::stoull(tok));
        } catch (const std::logic_error&) {
            throw ConfigError("bad seed '" + tok + "'");
        }
    }
    if (seeds.empty()) throw ConfigError("empty seed list");
    return seeds;
}

std::vector<std::size_t> parse_dim_list(const std::string& csv) {
    std::vector<std::size_t> dims;
    for (const std::string& tok : split_csv(csv)) {
        try {
            dims.push_back(static_cast<std::size_t>(std::stoull(tok)));
        } catch (const std::logic_error&) {
            throw ConfigError("bad dimension '" + tok + "'");
        }
    }
    if (dims.empty()) throw ConfigError("empty dimension list");
    return dims;
}

std::string format_dim_list(const std::vector<std::size_t>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(dims[i]);
    }
    return out;
}

} // namespace figraph
