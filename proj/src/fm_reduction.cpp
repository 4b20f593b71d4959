#include "figraph/fm_reduction.hpp"

#include <cmath>
#include <cstdio>

#include "figraph/error.hpp"
#include "figraph/rng.hpp"

namespace figraph {

void ReductionParams::validate() const {
    if (w.rows != v.rows || w.cols != v.cols)
        throw ShapeError("ReductionParams: W and V must both be d x k");
    if (u.size() != 2 * w.cols)
        throw ShapeError("ReductionParams: u must have length 2k");
}

double simplified_predict(const std::vector<double>& x, const ReductionParams& params,
                          bool fix_u) {
    params.validate();
    const std::size_t d = params.w.rows;
    const std::size_t k = params.w.cols;
    if (x.size() != d) throw ShapeError("simplified_predict: x must have length d");

    // h = W^T x  (the one linear aggregator layer with identity adjacency)
    std::vector<double> h(k, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (x[j] == 0.0) continue;
        for (std::size_t c = 0; c < k; ++c) h[c] += params.w(j, c) * x[j];
    }

    // Unweighted interaction sum (attention disabled).
    std::vector<double> inter(k, 0.0);
    for (std::size_t j1 = 0; j1 < d; ++j1) {
        if (x[j1] == 0.0) continue;
        for (std::size_t j2 = j1 + 1; j2 < d; ++j2) {
            if (x[j2] == 0.0) continue;
            const double scale = x[j1] * x[j2];
            for (std::size_t c = 0; c < k; ++c)
                inter[c] += scale * params.v(j1, c) * params.v(j2, c);
        }
    }

    double score = params.w0;
    for (std::size_t c = 0; c < k; ++c) {
        const double u_h = fix_u ? 1.0 : params.u[c];
        const double u_f = fix_u ? 1.0 : params.u[k + c];
        score += u_h * h[c] + u_f * inter[c];
    }
    return score;
}

std::vector<double> reduced_linear_weights(const Mat& w) {
    std::vector<double> out(w.rows, 0.0);
    for (std::size_t j = 0; j < w.rows; ++j)
        for (std::size_t c = 0; c < w.cols; ++c) out[j] += w(j, c);
    return out;
}

double vanilla_fm_predict(const std::vector<double>& x, double w0,
                          const std::vector<double>& w, const Mat& v) {
    const std::size_t d = x.size();
    if (w.size() != d || v.rows != d)
        throw ShapeError("vanilla_fm_predict: w and V must match x length");
    double score = w0;
    for (std::size_t j = 0; j < d; ++j) score += w[j] * x[j];
    for (std::size_t j1 = 0; j1 < d; ++j1)
        for (std::size_t j2 = j1 + 1; j2 < d; ++j2) {
            double ip = 0.0;
            for (std::size_t c = 0; c < v.cols; ++c) ip += v(j1, c) * v(j2, c);
            score += ip * x[j1] * x[j2];
        }
    return score;
}

double vanilla_fm_predict_fast(const std::vector<double>& x, double w0,
                               const std::vector<double>& w, const Mat& v) {
    const std::size_t d = x.size();
    if (w.size() != d || v.rows != d)
        throw ShapeError("vanilla_fm_predict_fast: w and V must match x length");
    double score = w0;
    for (std::size_t j = 0; j < d; ++j) score += w[j] * x[j];
    for (std::size_t c = 0; c < v.cols; ++c) {
        double lin = 0.0, sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = v(j, c) * x[j];
            lin += t;
            sq += t * t;
        }
        score += 0.5 * (lin * lin - sq);
    }
    return score;
}

ReductionReport verify_reduction(std::size_t trials, std::uint64_t seed) {
    Rng rng(seed);
    ReductionReport report;
    report.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = 2 + rng.below(9);  // up to 10
        const std::size_t k = 1 + rng.below(4);  // up to 4

        ReductionParams params;
        params.w0 = rng.uniform(-2.0, 2.0);
        params.w = Mat(d, k);
        params.v = Mat(d, k);
        params.u.assign(2 * k, 1.0);
        for (double& w : params.w.data) w = rng.uniform(-2.0, 2.0);
        for (double& w : params.v.data) w = rng.uniform(-2.0, 2.0);

        std::vector<double> x(d, 0.0);
        for (std::size_t j = 0; j < d; ++j)
            if (rng.uniform() < 0.6) x[j] = rng.uniform(-2.0, 2.0);

        const double simplified = simplified_predict(x, params, true);
        const double vanilla =
            vanilla_fm_predict(x, params.w0, reduced_linear_weights(params.w), params.v);
        const double dev = std::fabs(simplified - vanilla);
        report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
        if (dev >= report.threshold) report.failures.push_back({t, simplified, vanilla});
    }
    return report;
}

std::string format_reduction_report(const ReductionReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "trials %zu  max_abs_deviation %.3e (threshold %.0e) -> %s\n", report.trials,
                  report.max_abs_deviation, report.threshold,
                  report.pass() ? "pass" : "FAIL");
    std::string out = buf;
    for (const ReductionFailure& f : report.failures) {
        std::snprintf(buf, sizeof(buf), "  trial %zu: simplified %.17g vs vanilla %.17g\n",
                      f.trial, f.simplified, f.vanilla);
        out += buf;
    }
    return out;
}

} // namespace figraph
