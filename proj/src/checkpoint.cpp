#include "figraph/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "figraph/error.hpp"

namespace figraph {

namespace {

void write_tensor(std::ofstream& out, const std::string& name, const Mat& t) {
    if (t.empty()) return;
    out << "tensor " << name << ' ' << t.rows << ' ' << t.cols << '\n';
    char buf[40];
    for (std::size_t r = 0; r < t.rows; ++r) {
        for (std::size_t c = 0; c < t.cols; ++c) {
            std::snprintf(buf, sizeof(buf), c ? " %.17g" : "%.17g", t(r, c));
            out << buf;
        }
        out << '\n';
    }
}

} // namespace

KeyValueFile checkpoint_meta(const TrainConfig& cfg, int d, int num_classes) {
    KeyValueFile meta;
    store_config(cfg, meta);
    meta.set_int("d", d);
    meta.set_int("num_classes", num_classes);
    return meta;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const KeyValueFile& meta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out << "figraph-checkpoint 1\n";
    for (const auto& [key, value] : meta.entries()) out << "meta " << key << ' ' << value << '\n';
    for (std::size_t l = 0; l < params.aggregator.weights.size(); ++l)
        write_tensor(out, "W" + std::to_string(l + 1), params.aggregator.weights[l]);
    write_tensor(out, "V", params.v);
    write_tensor(out, "W_f", params.w_f);
    write_tensor(out, "head", params.head);
    if (!out) throw IoError("failed writing checkpoint " + path);
}

TrainConfig LoadedCheckpoint::config() const {
    TrainConfig cfg;
    apply_config(cfg, meta);
    return cfg;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint " + path);

    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "figraph-checkpoint")
        throw ParseError(path + ": not a figraph checkpoint");
    if (version != 1)
        throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));

    LoadedCheckpoint loaded;
    std::vector<std::pair<std::string, Mat>> tensors;
    while (in >> word) {
        if (word == "meta") {
            std::string key, value;
            if (!(in >> key >> value)) throw ParseError(path + ": truncated meta line");
            loaded.meta.set(key, value);
        } else if (word == "tensor") {
            std::string name;
            std::size_t rows = 0, cols = 0;
            if (!(in >> name >> rows >> cols)) throw ParseError(path + ": bad tensor header");
            Mat t(rows, cols);
            for (double& v : t.data)
                if (!(in >> v)) throw ParseError(path + ": truncated tensor " + name);
            tensors.emplace_back(name, std::move(t));
        } else {
            throw ParseError(path + ": unexpected token '" + word + "'");
        }
    }

    const TrainConfig cfg = loaded.config();
    loaded.params.aggregator.kind = cfg.aggregator;
    const int d = static_cast<int>(loaded.meta.get_int("d"));
    loaded.params.aggregator.dims = cfg.layer_dims(static_cast<std::size_t>(d));

    for (auto& [name, t] : tensors) {
        if (name == "V")
            loaded.params.v = std::move(t);
        else if (name == "W_f")
            loaded.params.w_f = std::move(t);
        else if (name == "head")
            loaded.params.head = std::move(t);
        else if (name.size() > 1 && name[0] == 'W') {
            const auto layer = static_cast<std::size_t>(std::stoul(name.substr(1)));
            if (loaded.params.aggregator.weights.size() < layer)
                loaded.params.aggregator.weights.resize(layer);
            loaded.params.aggregator.weights[layer - 1] = std::move(t);
        } else {
            throw ParseError(path + ": unknown tensor '" + name + "'");
        }
    }
    loaded.params.aggregator.validate();
    return loaded;
}

} // namespace figraph
