#include "figraph/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "figraph/error.hpp"
#include "figraph/rng.hpp"

namespace figraph {

namespace {

constexpr int kGroupSize = 4;   // features per designated group
constexpr int kNoisePool = 16;  // label-independent features
constexpr int kNoisePerNode = 1;

void add_random_edges(SparseGraph& g, double p, Rng& rng) {
    for (int u = 0; u < g.n; ++u)
        for (int v = u + 1; v < g.n; ++v)
            if (rng.uniform() < p) g.edges.push_back({u, v});
}

} // namespace

SparseGraph make_planted_graph(int n, std::uint64_t seed) {
    if (n < 20) throw ConfigError("make_planted_graph: need at least 20 nodes");
    Rng rng(seed);

    SparseGraph g;
    g.n = n;
    g.d = 2 * kGroupSize + kNoisePool;
    g.num_classes = 2;
    g.features.resize(n);
    g.labels.resize(n);

    for (int i = 0; i < n; ++i) {
        const int a = static_cast<int>(rng.below(kGroupSize));
        const int b = kGroupSize + static_cast<int>(rng.below(kGroupSize));
        const double sa = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double sb = rng.bernoulli(0.5) ? 1.0 : -1.0;
        g.labels[i] = sa * sb > 0.0 ? 1 : 0;

        std::vector<FeatureEntry> row{{a, sa}, {b, sb}};
        std::vector<int> noise(kNoisePool);
        std::iota(noise.begin(), noise.end(), 2 * kGroupSize);
        rng.shuffle(noise);
        for (int t = 0; t < kNoisePerNode; ++t)
            row.push_back({noise[t], rng.bernoulli(0.5) ? 1.0 : -1.0});
        std::sort(row.begin(), row.end(),
                  [](const FeatureEntry& x, const FeatureEntry& y) { return x.index < y.index; });
        g.features[i] = std::move(row);
    }

    // Average degree ~8, independent of the labels.
    add_random_edges(g, 8.0 / static_cast<double>(n - 1), rng);
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    g.validate();
    return g;
}

SparseGraph make_two_block_graph(int n, double p_within, double p_across,
                                 std::uint64_t seed) {
    if (n < 10) throw ConfigError("make_two_block_graph: need at least 10 nodes");
    Rng rng(seed);

    SparseGraph g;
    g.n = n;
    g.d = 17;
    g.num_classes = 2;
    g.features.resize(n);
    g.labels.resize(n);

    // Each node draws 3 of its block's 8 interest features; a few nodes also
    // carry the shared gateway feature. Edges follow the features with the
    // marginal rates kept at p_within / p_across, so held-out edges remain
    // predictable instead of being pure coin flips:
    //  - within a block, pairs sharing >= 2 interests always link, everything
    //    else links with p_within / 15 (the q = 1 calibration at 0.3);
    //  - across blocks, gateway pairs always link, the rest almost never.
    const int half = n / 2;
    std::vector<char> gateway(n, 0);
    const double p_gateway = std::sqrt(0.9 * p_across);
    for (int i = 0; i < n; ++i) {
        const int block = i < half ? 0 : 1;
        g.labels[i] = block;
        std::vector<int> pool(8);
        std::iota(pool.begin(), pool.end(), block * 8);
        rng.shuffle(pool);
        gateway[i] = rng.uniform() < p_gateway ? 1 : 0;
        std::vector<FeatureEntry> row;
        for (int t = 0; t < 3; ++t) row.push_back({pool[t], 1.0});
        if (gateway[i]) row.push_back({16, 1.0});
        std::sort(row.begin(), row.end(),
                  [](const FeatureEntry& x, const FeatureEntry& y) { return x.index < y.index; });
        g.features[i] = std::move(row);
    }

    const double p_low = p_within / 15.0;
    const double p_share2 = 16.0 / 56.0; // P(>= 2 shared) for two 3-of-8 draws
    const double q = std::min(1.0, (p_within - p_low * (1.0 - p_share2)) / p_share2);
    const double p2_low = 0.1 * p_across / (1.0 - 0.9 * p_across);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const bool same = (u < half) == (v < half);
            double p;
            if (same) {
                int shared = 0;
                for (const FeatureEntry& a : g.features[u])
                    for (const FeatureEntry& b : g.features[v])
                        if (a.index == b.index && a.index < 16) ++shared;
                p = shared >= 2 ? q : p_low;
            } else {
                p = gateway[u] && gateway[v] ? 1.0 : p2_low;
            }
            if (rng.uniform() < p) g.edges.push_back({u, v});
        }
    std::sort(g.edges.begin(), g.edges.end());
    g.validate();
    return g;
}

void write_graph_files(const SparseGraph& g, const std::string& dir) {
    std::filesystem::create_directories(dir);
    char buf[64];

    {
        std::ofstream out(dir + "/edges.txt");
        if (!out) throw IoError("cannot write " + dir + "/edges.txt");
        for (const Edge& e : g.edges) out << e.u << ' ' << e.v << '\n';
    }
    {
        std::ofstream out(dir + "/features.txt");
        if (!out) throw IoError("cannot write " + dir + "/features.txt");
        out << g.n << ' ' << g.d << '\n';
        for (int i = 0; i < g.n; ++i)
            for (const FeatureEntry& f : g.features[i]) {
                std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i, f.index, f.value);
                out << buf;
            }
    }
    if (g.has_labels()) {
        std::ofstream out(dir + "/labels.txt");
        if (!out) throw IoError("cannot write " + dir + "/labels.txt");
        out << g.n << ' ' << g.num_classes << '\n';
        for (int i = 0; i < g.n; ++i)
            if (g.labels[i] >= 0) out << i << ' ' << g.labels[i] << '\n';
    }
}

} // namespace figraph
