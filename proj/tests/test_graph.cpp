#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "figraph/error.hpp"
#include "figraph/graph.hpp"
#include "figraph/rng.hpp"

using namespace figraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("figraph_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

// Independent oracle: build A + I densely and normalize by explicit degree
// sums, then compare entrywise against the CSR result.
double dense_normalized_entry(const SparseGraph& g, int r, int c) {
    std::vector<std::vector<double>> a(g.n, std::vector<double>(g.n, 0.0));
    for (const Edge& e : g.edges) a[e.u][e.v] = a[e.v][e.u] = 1.0;
    for (int i = 0; i < g.n; ++i) a[i][i] = 1.0;
    std::vector<double> deg(g.n, 0.0);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) deg[i] += a[i][j];
    return a[r][c] / std::sqrt(deg[r] * deg[c]);
}

double csr_entry(const NormalizedAdjacency& a, int r, int c) {
    for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
        if (a.col[p] == c) return a.val[p];
    return 0.0;
}

SparseGraph random_graph(int n, int d, double edge_prob, std::uint64_t seed,
                         bool with_labels = false) {
    Rng rng(seed);
    SparseGraph g;
    g.n = n;
    g.d = d;
    g.features.resize(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.uniform() < edge_prob) g.edges.push_back({u, v});
    std::sort(g.edges.begin(), g.edges.end());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            if (rng.uniform() < 0.3) g.features[i].push_back({j, rng.uniform(-1.0, 1.0)});
    if (with_labels) {
        g.num_classes = 3;
        g.labels.resize(n);
        for (int i = 0; i < n; ++i) g.labels[i] = static_cast<int>(rng.below(3));
    }
    g.validate();
    return g;
}

} // namespace

TEST_CASE("load_graph parses the documented formats") {
    TempDir tmp;
    const auto edges = tmp.file("edges.txt", "0 1\n1 0\n1 2\n2 1\n");
    const auto feats = tmp.file("features.txt",
                                "3 4\n"
                                "0 1 0.5\n"
                                "0 0 2.0\n"
                                "1 3 -1.0\n"
                                "2 2 0.0\n"); // explicit zero must be dropped
    const auto labels = tmp.file("labels.txt", "3 2\n0 0\n2 1\n");

    const SparseGraph g = load_graph(edges, feats, labels);
    CHECK(g.n == 3);
    CHECK(g.d == 4);
    CHECK(g.num_classes == 2);
    // "0 1" and "1 0" collapse to one undirected edge.
    CHECK(g.num_edges() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(2, 1));
    // features sorted per node, zero dropped
    REQUIRE(g.features[0].size() == 2);
    CHECK(g.features[0][0].index == 0);
    CHECK(g.features[0][1].index == 1);
    CHECK(g.features[2].empty());
    // node 1 absent from the label file -> unlabeled
    CHECK(g.labels[0] == 0);
    CHECK(g.labels[1] == -1);
    CHECK(g.labels[2] == 1);
}

TEST_CASE("load_graph degenerate single-node graph") {
    TempDir tmp;
    const auto edges = tmp.file("edges.txt", "");
    const auto feats = tmp.file("features.txt", "1 1\n0 0 3.5\n");
    const SparseGraph g = load_graph(edges, feats);
    CHECK(g.n == 1);
    CHECK(g.num_edges() == 0);
    CHECK(g.features[0].size() == 1);
}

TEST_CASE("load_graph error paths") {
    TempDir tmp;
    const auto feats = tmp.file("features.txt", "2 2\n0 0 1.0\n");

    SUBCASE("malformed edge line carries a line number") {
        const auto bad = tmp.file("bad_edges.txt", "0 1\nnope\n");
        CHECK_THROWS_AS(load_graph(bad, feats), ParseError);
        try {
            load_graph(bad, feats);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SUBCASE("feature index beyond declared d") {
        const auto edges = tmp.file("edges.txt", "0 1\n");
        const auto badf = tmp.file("badf.txt", "2 2\n0 5 1.0\n");
        CHECK_THROWS_AS(load_graph(edges, badf), SchemaError);
    }
    SUBCASE("label beyond declared C") {
        const auto edges = tmp.file("edges.txt", "0 1\n");
        const auto badl = tmp.file("badl.txt", "2 2\n0 7\n");
        CHECK_THROWS_AS(load_graph(edges, feats, badl), SchemaError);
    }
    SUBCASE("self-loops are dropped, not stored") {
        const auto loops = tmp.file("loops.txt", "0 0\n0 1\n");
        const SparseGraph g = load_graph(loops, feats);
        CHECK(g.num_edges() == 1);
    }
    SUBCASE("edge endpoint beyond n") {
        const auto oob = tmp.file("oob.txt", "0 7\n");
        CHECK_THROWS_AS(load_graph(oob, feats), SchemaError);
    }
}

TEST_CASE("normalize_adjacency trivial cases") {
    SparseGraph g;
    g.n = 1;
    g.d = 1;
    g.features.resize(1);

    SUBCASE("single node") {
        const NormalizedAdjacency a = normalize_adjacency(g);
        REQUIRE(a.row_ptr == std::vector<int>{0, 1});
        CHECK(a.val[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("two nodes, one edge: all entries 0.5") {
        g.n = 2;
        g.features.resize(2);
        g.edges = {{0, 1}};
        const NormalizedAdjacency a = normalize_adjacency(g);
        REQUIRE(a.val.size() == 4);
        for (double v : a.val) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("three-node path: off-diagonal 1/sqrt(6)") {
        g.n = 3;
        g.features.resize(3);
        g.edges = {{0, 1}, {1, 2}};
        const NormalizedAdjacency a = normalize_adjacency(g);
        CHECK(csr_entry(a, 0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
        CHECK(csr_entry(a, 1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    }
}

TEST_CASE("normalize_adjacency matches the dense oracle on random graphs") {
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        const SparseGraph g = random_graph(1 + static_cast<int>(Rng(seed).below(50)), 3, 0.15, seed);
        const NormalizedAdjacency a = normalize_adjacency(g);
        double worst = 0.0;
        for (int r = 0; r < g.n; ++r) {
            // CSR rows must be sorted and match the A+I pattern.
            for (int p = a.row_ptr[r] + 1; p < a.row_ptr[r + 1]; ++p)
                CHECK(a.col[p - 1] < a.col[p]);
            for (int c = 0; c < g.n; ++c)
                worst = std::max(worst,
                                 std::fabs(csr_entry(a, r, c) - dense_normalized_entry(g, r, c)));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("spmm against direct dense multiply") {
    const SparseGraph g = random_graph(17, 2, 0.2, 5);
    const NormalizedAdjacency a = normalize_adjacency(g);
    Rng rng(3);
    Mat h(17, 4);
    for (double& v : h.data) v = rng.normal();
    const Mat out = spmm(a, h);
    for (int i = 0; i < g.n; ++i)
        for (int c = 0; c < 4; ++c) {
            double want = 0.0;
            for (int j = 0; j < g.n; ++j) want += dense_normalized_entry(g, i, j) * h(j, c);
            CHECK(out(i, c) == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("split_nodes sizes, determinism and disjointness") {
    const SparseGraph g = random_graph(100, 2, 0.05, 9, true);

    SUBCASE("10/20/70") {
        const DataSplits s = split_nodes(g, {0.1, 0.2, 0.7}, 77);
        CHECK(s.train_nodes.size() == 10);
        CHECK(s.val_nodes.size() == 20);
        CHECK(s.test_nodes.size() == 70);
        std::set<int> seen;
        for (const auto* part : {&s.train_nodes, &s.val_nodes, &s.test_nodes})
            for (int i : *part) CHECK(seen.insert(i).second);
        CHECK(seen.size() == 100);
    }
    SUBCASE("same seed -> identical, different seed -> different") {
        const DataSplits s1 = split_nodes(g, {0.1, 0.2, 0.7}, 77);
        const DataSplits s2 = split_nodes(g, {0.1, 0.2, 0.7}, 77);
        const DataSplits s3 = split_nodes(g, {0.1, 0.2, 0.7}, 78);
        CHECK(s1.train_nodes == s2.train_nodes);
        CHECK(s1.test_nodes == s2.test_nodes);
        CHECK(s1.train_nodes != s3.train_nodes);
    }
    SUBCASE("rounding remainder goes to test") {
        const SparseGraph small = random_graph(10, 2, 0.3, 4, true);
        const DataSplits s = split_nodes(small, {0.8, 0.1, 0.1}, 1);
        CHECK(s.train_nodes.size() == 8);
        CHECK(s.val_nodes.size() == 1);
        CHECK(s.test_nodes.size() == 1);
    }
    SUBCASE("bad ratios rejected") {
        CHECK_THROWS_AS(split_nodes(g, {0.5, 0.5, 0.5}, 1), ConfigError);
        CHECK_THROWS_AS(split_nodes(g, {-0.2, 0.5, 0.7}, 1), ConfigError);
    }
    SUBCASE("empty split rejected") {
        const SparseGraph tiny = random_graph(3, 2, 0.5, 4, true);
        CHECK_THROWS_AS(split_nodes(tiny, {0.05, 0.05, 0.9}, 1), ConfigError);
    }
    SUBCASE("unlabeled graph rejected") {
        const SparseGraph unl = random_graph(30, 2, 0.1, 4, false);
        CHECK_THROWS_AS(split_nodes(unl, {0.1, 0.2, 0.7}, 1), ConfigError);
    }
}

TEST_CASE("split_edges sizes and determinism") {
    SparseGraph g = random_graph(40, 2, 0.2, 13);
    REQUIRE(g.num_edges() >= 10);

    const DataSplits s = split_edges(g, {0.8, 0.1, 0.1}, 5);
    const std::size_t m = g.num_edges();
    CHECK(s.train_pos.size() == static_cast<std::size_t>(std::llround(0.8 * m)));
    CHECK(s.train_pos.size() + s.val_pos.size() + s.test_pos.size() == m);

    std::set<Edge> seen;
    for (const auto* part : {&s.train_pos, &s.val_pos, &s.test_pos})
        for (const Edge& e : *part) CHECK(seen.insert(e).second);
    CHECK(seen.size() == m);

    const DataSplits again = split_edges(g, {0.8, 0.1, 0.1}, 5);
    CHECK(s.train_pos == again.train_pos);

    SUBCASE("minimum viable: three edges, one per split") {
        SparseGraph three;
        three.n = 4;
        three.d = 1;
        three.features.resize(4);
        three.edges = {{0, 1}, {1, 2}, {2, 3}};
        const DataSplits t = split_edges(three, {0.34, 0.33, 0.33}, 2);
        CHECK(t.train_pos.size() == 1);
        CHECK(t.val_pos.size() == 1);
        CHECK(t.test_pos.size() == 1);
    }
}

TEST_CASE("sample_negative_edges") {
    SUBCASE("complete graph has no candidates") {
        SparseGraph k4;
        k4.n = 4;
        k4.d = 1;
        k4.features.resize(4);
        for (int u = 0; u < 4; ++u)
            for (int v = u + 1; v < 4; ++v) k4.edges.push_back({u, v});
        CHECK_THROWS_AS(sample_negative_edges(k4, 1, {}, 1), SamplingError);
    }
    SUBCASE("exactly the two available candidates") {
        SparseGraph g;
        g.n = 3;
        g.d = 1;
        g.features.resize(3);
        g.edges = {{0, 1}};
        const auto neg = sample_negative_edges(g, 2, {}, 3);
        REQUIRE(neg.size() == 2);
        CHECK(neg[0] == Edge{0, 2});
        CHECK(neg[1] == Edge{1, 2});
    }
    SUBCASE("count zero") {
        SparseGraph g;
        g.n = 3;
        g.d = 1;
        g.features.resize(3);
        CHECK(sample_negative_edges(g, 0, {}, 1).empty());
    }
    SUBCASE("never collides with positives or exclusions, reproducible") {
        const SparseGraph g = random_graph(60, 2, 0.15, 21);
        const std::vector<Edge> exclude = {{0, 5}, {3, 9}};
        for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
            const auto neg = sample_negative_edges(g, 200, exclude, seed);
            CHECK(neg.size() == 200);
            std::set<Edge> uniq(neg.begin(), neg.end());
            CHECK(uniq.size() == 200);
            for (const Edge& e : neg) {
                CHECK(e.u < e.v);
                CHECK(!g.has_edge(e.u, e.v));
                CHECK(std::find(exclude.begin(), exclude.end(), e) == exclude.end());
            }
            CHECK(sample_negative_edges(g, 200, exclude, seed) == neg);
        }
    }
}

TEST_CASE("attach_negative_edges fills matching, disjoint sets") {
    const SparseGraph g = random_graph(50, 2, 0.2, 31);
    DataSplits s = split_edges(g, {0.8, 0.1, 0.1}, 4);
    attach_negative_edges(g, s, 99);
    CHECK(s.train_neg.size() == s.train_pos.size());
    CHECK(s.val_neg.size() == s.val_pos.size());
    CHECK(s.test_neg.size() == s.test_pos.size());
    std::set<Edge> seen;
    for (const auto* part : {&s.train_neg, &s.val_neg, &s.test_neg})
        for (const Edge& e : *part) {
            CHECK(seen.insert(e).second); // mutually disjoint
            CHECK(!g.has_edge(e.u, e.v));
        }
}

TEST_CASE("with_edges keeps features and replaces topology") {
    const SparseGraph g = random_graph(20, 3, 0.3, 8);
    const std::vector<Edge> subset(g.edges.begin(), g.edges.begin() + g.edges.size() / 2);
    const SparseGraph sub = with_edges(g, subset);
    CHECK(sub.num_edges() == subset.size());
    CHECK(sub.features == g.features);
    CHECK(sub.n == g.n);
}
