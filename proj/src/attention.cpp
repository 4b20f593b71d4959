#include "figraph/attention.hpp"

#include <algorithm>
#include <cmath>

#include "figraph/error.hpp"

namespace figraph {

Mat init_attention(std::size_t k, Rng& rng) {
    Mat w(k, k);
    const double bound = std::sqrt(6.0 / static_cast<double>(k + k));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

namespace {

void check_dims(std::span<const double> h, const InteractionSet& inter, const Mat& w_f,
                bool enabled) {
    const std::size_t k = h.size();
    if (!inter.empty() && inter.vectors.cols != k)
        throw ShapeError("attend: interaction width " + std::to_string(inter.vectors.cols) +
                         " vs h width " + std::to_string(k));
    if (enabled && (w_f.rows != k || w_f.cols != k))
        throw ShapeError("attend: W_f must be " + std::to_string(k) + "x" + std::to_string(k));
}

// tanh(W_f e) for one interaction vector.
std::vector<double> projected_tanh(const Mat& w_f, const double* e) {
    std::vector<double> t(w_f.rows, 0.0);
    for (std::size_t r = 0; r < w_f.rows; ++r) {
        const double* wrow = w_f.data.data() + r * w_f.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < w_f.cols; ++c) acc += wrow[c] * e[c];
        t[r] = std::tanh(acc);
    }
    return t;
}

} // namespace

AttendResult attend(std::span<const double> h, const InteractionSet& interactions,
                    const Mat& w_f, bool enabled) {
    check_dims(h, interactions, w_f, enabled);
    const std::size_t k = h.size();
    const std::size_t m = interactions.size();

    AttendResult out;
    out.f.assign(k, 0.0);
    if (m == 0) return out;

    if (!enabled) {
        // Ablation: plain unweighted sum of the interaction vectors.
        for (std::size_t p = 0; p < m; ++p) {
            const double* e = interactions.vectors.data.data() + p * k;
            for (std::size_t c = 0; c < k; ++c) out.f[c] += e[c];
        }
        return out;
    }

    std::vector<double> logits(m);
    for (std::size_t p = 0; p < m; ++p) {
        const double* e = interactions.vectors.data.data() + p * k;
        const std::vector<double> t = projected_tanh(w_f, e);
        double a = 0.0;
        for (std::size_t c = 0; c < k; ++c) a += h[c] * t[c];
        logits[p] = a;
    }

    // Shifted softmax over this node's pairs.
    const double peak = *std::max_element(logits.begin(), logits.end());
    out.alpha.resize(m);
    double denom = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
        out.alpha[p] = std::exp(logits[p] - peak);
        denom += out.alpha[p];
    }
    for (std::size_t p = 0; p < m; ++p) {
        out.alpha[p] /= denom;
        const double* e = interactions.vectors.data.data() + p * k;
        for (std::size_t c = 0; c < k; ++c) out.f[c] += out.alpha[p] * e[c];
    }
    return out;
}

std::vector<double> fuse(std::span<const double> h, std::span<const double> f) {
    if (h.size() != f.size())
        throw ShapeError("fuse: h width " + std::to_string(h.size()) + " vs f width " +
                         std::to_string(f.size()));
    std::vector<double> z;
    z.reserve(h.size() + f.size());
    z.insert(z.end(), h.begin(), h.end());
    z.insert(z.end(), f.begin(), f.end());
    return z;
}

AttendGrads attend_backward(std::span<const double> h, const InteractionSet& interactions,
                            const Mat& w_f, bool enabled,
                            const AttendResult& fwd, std::span<const double> df,
                            Mat& dw_f) {
    check_dims(h, interactions, w_f, enabled);
    const std::size_t k = h.size();
    const std::size_t m = interactions.size();

    AttendGrads g;
    g.dh.assign(k, 0.0);
    g.d_interactions = Mat(m, k);
    if (m == 0) return g;

    if (!enabled) {
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t c = 0; c < k; ++c) g.d_interactions(p, c) = df[c];
        return g;
    }

    // f = sum_p alpha_p e_p
    std::vector<double> dalpha(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        const double* e = interactions.vectors.data.data() + p * k;
        double acc = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            acc += df[c] * e[c];
            g.d_interactions(p, c) += fwd.alpha[p] * df[c];
        }
        dalpha[p] = acc;
    }

    // Softmax: da_p = alpha_p (dalpha_p - sum_q alpha_q dalpha_q)
    double weighted = 0.0;
    for (std::size_t p = 0; p < m; ++p) weighted += fwd.alpha[p] * dalpha[p];
    std::vector<double> dlogit(m);
    for (std::size_t p = 0; p < m; ++p) dlogit[p] = fwd.alpha[p] * (dalpha[p] - weighted);

    // a_p = h^T tanh(W_f e_p)
    for (std::size_t p = 0; p < m; ++p) {
        const double* e = interactions.vectors.data.data() + p * k;
        const std::vector<double> t = projected_tanh(w_f, e);
        for (std::size_t c = 0; c < k; ++c) g.dh[c] += dlogit[p] * t[c];

        // du = dlogit * h (.) (1 - t^2), where u = W_f e
        for (std::size_t r = 0; r < k; ++r) {
            const double du = dlogit[p] * h[r] * (1.0 - t[r] * t[r]);
            if (du == 0.0) continue;
            double* dwrow = dw_f.data.data() + r * k;
            const double* wrow = w_f.data.data() + r * k;
            for (std::size_t c = 0; c < k; ++c) {
                dwrow[c] += du * e[c];
                g.d_interactions(p, c) += du * wrow[c];
            }
        }
    }
    return g;
}

} // namespace figraph
