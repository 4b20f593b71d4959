#include "figraph/factorizer.hpp"

#include <algorithm>
#include <cmath>

#include "figraph/error.hpp"

namespace figraph {

Mat init_factorizer(int d, std::size_t k, Rng& rng) {
    // N(0, 0.01), i.e. stdev 0.1, the usual FM embedding init.
    Mat v(static_cast<std::size_t>(d), k);
    for (double& w : v.data) w = rng.normal(0.0, 0.1);
    return v;
}

std::vector<FeatureEntry> capped_features(const std::vector<FeatureEntry>& x,
                                          std::size_t nnz_cap) {
    if (nnz_cap == 0 || x.size() <= nnz_cap) return x;
    std::vector<FeatureEntry> picked = x;
    std::sort(picked.begin(), picked.end(), [](const FeatureEntry& a, const FeatureEntry& b) {
        const double ma = std::fabs(a.value), mb = std::fabs(b.value);
        if (ma != mb) return ma > mb;
        return a.index < b.index;
    });
    picked.resize(nnz_cap);
    std::sort(picked.begin(), picked.end(),
              [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
    return picked;
}

InteractionSet factorize_node(const std::vector<FeatureEntry>& x, const Mat& v,
                              std::size_t nnz_cap) {
    const std::size_t k = v.cols;
    for (const FeatureEntry& f : x)
        if (f.index < 0 || static_cast<std::size_t>(f.index) >= v.rows)
            throw SchemaError("feature index " + std::to_string(f.index) +
                              " outside embedding table with d=" + std::to_string(v.rows));

    const std::vector<FeatureEntry> feats = capped_features(x, nnz_cap);
    const std::size_t nnz = feats.size();

    InteractionSet out;
    if (nnz < 2) {
        out.vectors = Mat(0, k);
        return out;
    }
    const std::size_t num_pairs = nnz * (nnz - 1) / 2;
    out.pairs.reserve(num_pairs);
    out.vectors = Mat(num_pairs, k);

    std::size_t p = 0;
    for (std::size_t a = 0; a < nnz; ++a) {
        const auto [j1, x1] = feats[a];
        const double* v1 = v.data.data() + static_cast<std::size_t>(j1) * k;
        for (std::size_t b = a + 1; b < nnz; ++b, ++p) {
            const auto [j2, x2] = feats[b];
            const double* v2 = v.data.data() + static_cast<std::size_t>(j2) * k;
            out.pairs.emplace_back(j1, j2);
            double* e = out.vectors.data.data() + p * k;
            const double scale = x1 * x2;
            for (std::size_t c = 0; c < k; ++c) e[c] = scale * v1[c] * v2[c];
        }
    }
    return out;
}

} // namespace figraph
