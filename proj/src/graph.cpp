#include "figraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "figraph/error.hpp"
#include "figraph/rng.hpp"

namespace figraph {

namespace {

// 64-bit key for an unordered pair, used by hash-set membership tests.
std::uint64_t edge_key(const Edge& e) {
    return (static_cast<std::uint64_t>(e.u) << 32) | static_cast<std::uint32_t>(e.v);
}

struct LineReader {
    std::ifstream in;
    std::string path;
    long line_no = 0;

    explicit LineReader(const std::string& p) : in(p), path(p) {
        if (!in) throw IoError("cannot open " + p);
    }

    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            // Tolerate blank lines and '#' comments.
            const auto first = line.find_first_not_of(" \t\r\n");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
    }
};

} // namespace

bool SparseGraph::has_edge(int a, int b) const {
    if (a == b) return false;
    return std::binary_search(edges.begin(), edges.end(), make_edge(a, b));
}

std::vector<std::vector<int>> SparseGraph::adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (const Edge& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

std::vector<int> SparseGraph::labeled_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < n && has_labels(); ++i)
        if (labels[i] >= 0) out.push_back(i);
    return out;
}

void SparseGraph::validate() const {
    if (n < 0 || d < 0) throw SchemaError("negative node or feature count");
    if (static_cast<int>(features.size()) != n)
        throw SchemaError("feature row count does not match n");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.u >= e.v) throw SchemaError("edge not canonical or self-loop");
        if (e.v >= n) throw SchemaError("edge endpoint out of range");
        if (i > 0 && !(edges[i - 1] < e)) throw SchemaError("edges not sorted/unique");
    }
    for (int i = 0; i < n; ++i) {
        int prev = -1;
        for (const FeatureEntry& f : features[i]) {
            if (f.index <= prev) throw SchemaError("feature indices not strictly increasing");
            if (f.index >= d) throw SchemaError("feature index out of range");
            prev = f.index;
        }
    }
    if (has_labels()) {
        if (static_cast<int>(labels.size()) != n) throw SchemaError("label count mismatch");
        for (int y : labels)
            if (y >= num_classes || y < -1) throw SchemaError("label out of range");
    }
}

SparseGraph with_edges(const SparseGraph& g, const std::vector<Edge>& edges) {
    SparseGraph out = g;
    out.edges = edges;
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
}

SparseGraph load_graph(const std::string& edge_file,
                       const std::string& feature_file,
                       const std::optional<std::string>& label_file) {
    SparseGraph g;

    // Feature file carries the graph dimensions: "n d" header, then
    // "node_id feature_id value" triplets.
    {
        LineReader r(feature_file);
        std::string line;
        if (!r.next(line)) r.fail("missing 'n d' header");
        {
            std::istringstream ss(line);
            if (!(ss >> g.n >> g.d)) r.fail("malformed 'n d' header");
            std::string extra;
            if (ss >> extra) r.fail("trailing tokens after header");
            if (g.n <= 0 || g.d <= 0) r.fail("n and d must be positive");
        }
        g.features.resize(g.n);
        while (r.next(line)) {
            std::istringstream ss(line);
            int node, feat;
            double value;
            if (!(ss >> node >> feat >> value)) r.fail("expected 'node feature value'");
            std::string extra;
            if (ss >> extra) r.fail("trailing tokens on feature triplet");
            if (node < 0 || node >= g.n) r.fail("node id out of range");
            if (feat < 0 || feat >= g.d)
                throw SchemaError(feature_file + ":" + std::to_string(r.line_no) +
                                  ": feature index " + std::to_string(feat) +
                                  " >= declared d=" + std::to_string(g.d));
            if (value == 0.0) continue; // explicit zeros carry no information
            g.features[node].push_back({feat, value});
        }
        for (auto& row : g.features) {
            std::sort(row.begin(), row.end(),
                      [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
            // Duplicate triplets for one (node, feature) are a schema problem.
            for (std::size_t i = 1; i < row.size(); ++i)
                if (row[i].index == row[i - 1].index)
                    throw SchemaError(feature_file + ": duplicate feature index " +
                                      std::to_string(row[i].index));
        }
    }

    // Edge file: one "u v" pair per line. Reversed duplicates merge; raw
    // self-loops are dropped with a warning (normalization adds its own).
    {
        LineReader r(edge_file);
        std::string line;
        long self_loops = 0;
        while (r.next(line)) {
            std::istringstream ss(line);
            int a, b;
            if (!(ss >> a >> b)) r.fail("expected 'u v'");
            std::string extra;
            if (ss >> extra) r.fail("trailing tokens on edge line");
            if (a < 0 || b < 0) r.fail("negative node id");
            if (a >= g.n || b >= g.n)
                throw SchemaError(edge_file + ":" + std::to_string(r.line_no) +
                                  ": node id beyond n=" + std::to_string(g.n));
            if (a == b) {
                ++self_loops;
                continue;
            }
            g.edges.push_back(make_edge(a, b));
        }
        if (self_loops > 0)
            std::cerr << "warning: dropped " << self_loops << " self-loop line(s) from "
                      << edge_file << "\n";
        std::sort(g.edges.begin(), g.edges.end());
        g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    }

    // Label file: "n C" header, then "node label" lines; absent nodes stay
    // unlabeled (-1).
    if (label_file) {
        LineReader r(*label_file);
        std::string line;
        if (!r.next(line)) r.fail("missing 'n C' header");
        int ln = 0;
        {
            std::istringstream ss(line);
            if (!(ss >> ln >> g.num_classes)) r.fail("malformed 'n C' header");
            if (ln != g.n)
                throw SchemaError(*label_file + ": node count " + std::to_string(ln) +
                                  " disagrees with feature file n=" + std::to_string(g.n));
            if (g.num_classes <= 0) r.fail("C must be positive");
        }
        g.labels.assign(g.n, -1);
        while (r.next(line)) {
            std::istringstream ss(line);
            int node, label;
            if (!(ss >> node >> label)) r.fail("expected 'node label'");
            std::string extra;
            if (ss >> extra) r.fail("trailing tokens on label line");
            if (node < 0 || node >= g.n) r.fail("node id out of range");
            if (label < 0 || label >= g.num_classes)
                throw SchemaError(*label_file + ":" + std::to_string(r.line_no) +
                                  ": label " + std::to_string(label) +
                                  " >= declared C=" + std::to_string(g.num_classes));
            g.labels[node] = label;
        }
    }

    g.validate();
    return g;
}

NormalizedAdjacency normalize_adjacency(const SparseGraph& g) {
    const auto adj = g.adjacency();
    NormalizedAdjacency a;
    a.n = g.n;
    a.row_ptr.assign(g.n + 1, 0);

    // Degree of A + I: neighbor count plus the added self-loop.
    std::vector<double> inv_sqrt_deg(g.n);
    for (int i = 0; i < g.n; ++i)
        inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size()) + 1.0);

    for (int i = 0; i < g.n; ++i) a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(adj[i].size()) + 1;
    a.col.resize(a.row_ptr.back());
    a.val.resize(a.row_ptr.back());

    for (int i = 0; i < g.n; ++i) {
        int pos = a.row_ptr[i];
        bool self_written = false;
        for (int j : adj[i]) {
            if (!self_written && j > i) {
                a.col[pos] = i;
                a.val[pos] = inv_sqrt_deg[i] * inv_sqrt_deg[i];
                ++pos;
                self_written = true;
            }
            a.col[pos] = j;
            a.val[pos] = inv_sqrt_deg[i] * inv_sqrt_deg[j];
            ++pos;
        }
        if (!self_written) {
            a.col[pos] = i;
            a.val[pos] = inv_sqrt_deg[i] * inv_sqrt_deg[i];
            ++pos;
        }
    }
    return a;
}

Mat spmm(const NormalizedAdjacency& a, const Mat& h) {
    if (static_cast<std::size_t>(a.n) != h.rows)
        throw ShapeError("spmm: adjacency n=" + std::to_string(a.n) + " vs H rows=" +
                         std::to_string(h.rows));
    Mat out(h.rows, h.cols);
    for (int i = 0; i < a.n; ++i) {
        double* orow = out.data.data() + static_cast<std::size_t>(i) * out.cols;
        for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const double w = a.val[p];
            const double* hrow = h.data.data() + static_cast<std::size_t>(a.col[p]) * h.cols;
            for (std::size_t c = 0; c < h.cols; ++c) orow[c] += w * hrow[c];
        }
    }
    return out;
}

void SplitRatios::validate() const {
    if (train <= 0.0 || val <= 0.0 || test <= 0.0)
        throw ConfigError("split ratios must be positive");
    if (std::fabs(train + val + test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");
}

namespace {

// Shared three-way partition: sizes round(ratio * total), remainder to test.
template <class T>
void partition_three(std::vector<T>& items, const SplitRatios& ratios, Rng& rng,
                     std::vector<T>& train, std::vector<T>& val, std::vector<T>& test,
                     const char* what) {
    const std::size_t total = items.size();
    const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(total)));
    const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(total)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= total)
        throw ConfigError(std::string(what) + ": a split would be empty");
    rng.shuffle(items);
    train.assign(items.begin(), items.begin() + n_train);
    val.assign(items.begin() + n_train, items.begin() + n_train + n_val);
    test.assign(items.begin() + n_train + n_val, items.end());
}

} // namespace

DataSplits split_nodes(const SparseGraph& g, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    if (!g.has_labels()) throw ConfigError("split_nodes requires labels");
    std::vector<int> ids(g.n);
    for (int i = 0; i < g.n; ++i) ids[i] = i;
    Rng rng(seed);
    DataSplits s;
    partition_three(ids, ratios, rng, s.train_nodes, s.val_nodes, s.test_nodes, "split_nodes");
    return s;
}

DataSplits split_edges(const SparseGraph& g, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    if (g.num_edges() < 3) throw ConfigError("split_edges needs at least 3 edges");
    std::vector<Edge> edges = g.edges;
    Rng rng(seed);
    DataSplits s;
    partition_three(edges, ratios, rng, s.train_pos, s.val_pos, s.test_pos, "split_edges");
    return s;
}

std::vector<Edge> sample_negative_edges(const SparseGraph& g,
                                        std::size_t count,
                                        const std::vector<Edge>& exclude,
                                        std::uint64_t seed) {
    if (count == 0) return {};
    if (g.n < 2) throw SamplingError("no non-edges exist in a graph with n < 2");

    std::unordered_set<std::uint64_t> forbidden;
    forbidden.reserve(g.edges.size() + exclude.size());
    for (const Edge& e : g.edges) forbidden.insert(edge_key(e));
    for (const Edge& e : exclude) forbidden.insert(edge_key(e));

    const std::uint64_t all_pairs =
        static_cast<std::uint64_t>(g.n) * static_cast<std::uint64_t>(g.n - 1) / 2;
    if (all_pairs < forbidden.size() + count)
        throw SamplingError("requested " + std::to_string(count) +
                            " negative edges but fewer non-edges remain");

    Rng rng(seed);
    std::vector<Edge> result;
    result.reserve(count);

    // Dense or near-exhausted case: enumerate every candidate and take a
    // random prefix. Otherwise rejection-sample uniform pairs.
    const std::uint64_t available = all_pairs - forbidden.size();
    if (all_pairs <= 1u << 22 || count * 3 > available) {
        std::vector<Edge> candidates;
        candidates.reserve(available);
        for (int u = 0; u < g.n; ++u)
            for (int v = u + 1; v < g.n; ++v)
                if (!forbidden.count(edge_key({u, v}))) candidates.push_back({u, v});
        if (candidates.size() < count)
            throw SamplingError("fewer non-edges than requested");
        rng.shuffle(candidates);
        result.assign(candidates.begin(), candidates.begin() + count);
    } else {
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(count * 2);
        while (result.size() < count) {
            const int a = static_cast<int>(rng.below(g.n));
            const int b = static_cast<int>(rng.below(g.n));
            if (a == b) continue;
            const Edge e = make_edge(a, b);
            const std::uint64_t key = edge_key(e);
            if (forbidden.count(key) || seen.count(key)) continue;
            seen.insert(key);
            result.push_back(e);
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

void attach_negative_edges(const SparseGraph& g, DataSplits& splits, std::uint64_t seed) {
    Rng base(seed);
    std::vector<Edge> exclude;
    splits.train_neg = sample_negative_edges(g, splits.train_pos.size(), exclude,
                                             base.fork(1).seed());
    exclude.insert(exclude.end(), splits.train_neg.begin(), splits.train_neg.end());
    splits.val_neg = sample_negative_edges(g, splits.val_pos.size(), exclude,
                                           base.fork(2).seed());
    exclude.insert(exclude.end(), splits.val_neg.begin(), splits.val_neg.end());
    splits.test_neg = sample_negative_edges(g, splits.test_pos.size(), exclude,
                                            base.fork(3).seed());
}

} // namespace figraph
