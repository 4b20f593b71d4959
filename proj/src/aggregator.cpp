#include "figraph/aggregator.hpp"

#include <cmath>
#include <string>

#include "figraph/error.hpp"

namespace figraph {

const char* to_string(AggregatorKind kind) {
    return kind == AggregatorKind::gcn ? "gcn" : "sage";
}

AggregatorKind aggregator_kind_from_string(const std::string& name) {
    if (name == "gcn") return AggregatorKind::gcn;
    if (name == "sage" || name == "sage-mean") return AggregatorKind::sage_mean;
    throw ConfigError("unknown aggregator '" + name + "' (expected gcn or sage)");
}

void AggregatorParams::validate() const {
    if (dims.size() < 2) throw ShapeError("aggregator needs at least one layer");
    if (weights.size() != dims.size() - 1)
        throw ShapeError("aggregator weight count does not match dims chain");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t in = kind == AggregatorKind::gcn ? dims[l] : 2 * dims[l];
        if (weights[l].rows != in || weights[l].cols != dims[l + 1])
            throw ShapeError("aggregator layer " + std::to_string(l) + " has shape " +
                             std::to_string(weights[l].rows) + "x" +
                             std::to_string(weights[l].cols) + ", expected " +
                             std::to_string(in) + "x" + std::to_string(dims[l + 1]));
    }
}

AggregatorParams init_aggregator(AggregatorKind kind, const std::vector<std::size_t>& dims,
                                 Rng& rng) {
    AggregatorParams p;
    p.kind = kind;
    p.dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = kind == AggregatorKind::gcn ? dims[l] : 2 * dims[l];
        const std::size_t fan_out = dims[l + 1];
        Mat w(fan_in, fan_out);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
    }
    p.validate();
    return p;
}

namespace {

void relu_inplace(Mat& m) {
    for (double& v : m.data)
        if (v < 0.0) v = 0.0;
}

Mat neighbor_mean(const Mat& h, const std::vector<std::vector<int>>& neighbors) {
    Mat m(h.rows, h.cols);
    for (std::size_t i = 0; i < h.rows; ++i) {
        const auto& nbrs = neighbors[i];
        if (nbrs.empty()) continue; // isolated node keeps the zero vector
        double* mrow = m.data.data() + i * m.cols;
        for (int j : nbrs) {
            const double* hrow = h.data.data() + static_cast<std::size_t>(j) * h.cols;
            for (std::size_t c = 0; c < h.cols; ++c) mrow[c] += hrow[c];
        }
        const double inv = 1.0 / static_cast<double>(nbrs.size());
        for (std::size_t c = 0; c < h.cols; ++c) mrow[c] *= inv;
    }
    return m;
}

// pre = [self | mean] * w, with w stacked as p self rows then p neighbor rows.
Mat sage_combine(const Mat& self, const Mat& mean, const Mat& w) {
    const std::size_t p = self.cols;
    Mat pre(self.rows, w.cols);
    for (std::size_t i = 0; i < self.rows; ++i) {
        double* orow = pre.data.data() + i * pre.cols;
        const double* srow = self.data.data() + i * p;
        const double* mrow = mean.data.data() + i * p;
        for (std::size_t r = 0; r < p; ++r) {
            const double a = srow[r];
            if (a != 0.0) {
                const double* wrow = w.data.data() + r * w.cols;
                for (std::size_t c = 0; c < w.cols; ++c) orow[c] += a * wrow[c];
            }
            const double b = mrow[r];
            if (b != 0.0) {
                const double* wrow = w.data.data() + (p + r) * w.cols;
                for (std::size_t c = 0; c < w.cols; ++c) orow[c] += b * wrow[c];
            }
        }
    }
    return pre;
}

// Layer-0 transform on sparse rows for the GCN path: X * W.
Mat sparse_times_dense(const std::vector<std::vector<FeatureEntry>>& x, const Mat& w,
                       std::size_t n) {
    Mat out(n, w.cols);
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = out.data.data() + i * out.cols;
        for (const FeatureEntry& f : x[i]) {
            const double* wrow = w.data.data() + static_cast<std::size_t>(f.index) * w.cols;
            for (std::size_t c = 0; c < w.cols; ++c) orow[c] += f.value * wrow[c];
        }
    }
    return out;
}

} // namespace

Mat gcn_layer(const Mat& h, const NormalizedAdjacency& a, const Mat& w, bool relu) {
    if (h.cols != w.rows)
        throw ShapeError("gcn_layer: H cols " + std::to_string(h.cols) + " vs W rows " +
                         std::to_string(w.rows));
    Mat out = spmm(a, matmul(h, w));
    if (relu) relu_inplace(out);
    return out;
}

Mat sage_mean_layer(const Mat& h, const std::vector<std::vector<int>>& neighbors, const Mat& w,
                    bool relu) {
    if (2 * h.cols != w.rows)
        throw ShapeError("sage_mean_layer: W rows " + std::to_string(w.rows) +
                         " must be twice H cols " + std::to_string(h.cols));
    if (h.rows != neighbors.size())
        throw ShapeError("sage_mean_layer: H rows vs neighbor list count");
    const Mat mean = neighbor_mean(h, neighbors);
    Mat out = sage_combine(h, mean, w);
    if (relu) relu_inplace(out);
    return out;
}

AggregatorCache aggregator_forward(const SparseGraph& g, const GraphTopology& topo,
                                   const AggregatorParams& p, double dropout, bool training,
                                   bool relu_last, Rng& dropout_rng) {
    p.validate();
    if (p.input_dim() != static_cast<std::size_t>(g.d))
        throw ShapeError("aggregator input dim " + std::to_string(p.input_dim()) +
                         " vs graph d=" + std::to_string(g.d));
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");

    const std::size_t n = static_cast<std::size_t>(g.n);
    const std::size_t layer_count = p.layers();
    const bool drop = training && dropout > 0.0;
    const double keep_scale = drop ? 1.0 / (1.0 - dropout) : 1.0;

    AggregatorCache cache;
    cache.relu_applied.resize(layer_count);

    // Layer-0 input: features with inverted dropout applied entry-wise.
    cache.x0 = g.features;
    if (drop) {
        for (auto& row : cache.x0) {
            std::size_t kept = 0;
            for (const FeatureEntry& f : row) {
                if (dropout_rng.uniform() < dropout) continue;
                row[kept++] = {f.index, f.value * keep_scale};
            }
            row.resize(kept);
        }
    }

    for (std::size_t l = 0; l < layer_count; ++l) {
        const bool relu = (l + 1 < layer_count) || relu_last;
        cache.relu_applied[l] = relu;

        Mat pre;
        if (l == 0) {
            if (p.kind == AggregatorKind::gcn) {
                pre = spmm(topo.a_hat, sparse_times_dense(cache.x0, p.weights[0], n));
            } else {
                const std::size_t d = p.dims[0];
                pre = Mat(n, p.weights[0].cols);
                for (std::size_t i = 0; i < n; ++i) {
                    double* orow = pre.data.data() + i * pre.cols;
                    for (const FeatureEntry& f : cache.x0[i]) {
                        const double* wrow =
                            p.weights[0].data.data() + static_cast<std::size_t>(f.index) * pre.cols;
                        for (std::size_t c = 0; c < pre.cols; ++c) orow[c] += f.value * wrow[c];
                    }
                    const auto& nbrs = topo.neighbors[i];
                    if (nbrs.empty()) continue;
                    const double inv = 1.0 / static_cast<double>(nbrs.size());
                    for (int j : nbrs) {
                        for (const FeatureEntry& f : cache.x0[static_cast<std::size_t>(j)]) {
                            const double* wrow =
                                p.weights[0].data.data() +
                                (d + static_cast<std::size_t>(f.index)) * pre.cols;
                            const double v = f.value * inv;
                            for (std::size_t c = 0; c < pre.cols; ++c) orow[c] += v * wrow[c];
                        }
                    }
                }
            }
        } else {
            Mat input = cache.outputs[l - 1];
            if (drop) {
                Mat mask(input.rows, input.cols);
                for (std::size_t i = 0; i < mask.data.size(); ++i)
                    mask.data[i] = dropout_rng.uniform() < dropout ? 0.0 : keep_scale;
                for (std::size_t i = 0; i < input.data.size(); ++i) input.data[i] *= mask.data[i];
                cache.masks.push_back(std::move(mask));
            }
            if (p.kind == AggregatorKind::gcn) {
                pre = spmm(topo.a_hat, matmul(input, p.weights[l]));
            } else {
                const Mat mean = neighbor_mean(input, topo.neighbors);
                pre = sage_combine(input, mean, p.weights[l]);
            }
            cache.inputs.push_back(std::move(input));
        }

        if (relu) relu_inplace(pre);
        cache.outputs.push_back(std::move(pre));
    }
    return cache;
}

std::vector<Mat> aggregator_backward(const GraphTopology& topo, const AggregatorParams& p,
                                     const AggregatorCache& cache, Mat d_out) {
    const std::size_t layer_count = p.layers();
    std::vector<Mat> grads(layer_count);

    for (std::size_t li = layer_count; li-- > 0;) {
        // Through the activation.
        Mat d_pre = std::move(d_out);
        if (cache.relu_applied[li]) {
            const Mat& out = cache.outputs[li];
            for (std::size_t i = 0; i < d_pre.data.size(); ++i)
                if (out.data[i] <= 0.0) d_pre.data[i] = 0.0;
        }

        Mat d_in; // gradient w.r.t. this layer's (post-dropout) input
        if (p.kind == AggregatorKind::gcn) {
            const Mat d_prod = spmm(topo.a_hat, d_pre); // A_hat is symmetric
            if (li == 0) {
                grads[0] = Mat(p.weights[0].rows, p.weights[0].cols);
                for (std::size_t i = 0; i < d_prod.rows; ++i) {
                    const double* drow = d_prod.data.data() + i * d_prod.cols;
                    for (const FeatureEntry& f : cache.x0[i]) {
                        double* grow = grads[0].data.data() +
                                       static_cast<std::size_t>(f.index) * grads[0].cols;
                        for (std::size_t c = 0; c < d_prod.cols; ++c)
                            grow[c] += f.value * drow[c];
                    }
                }
            } else {
                grads[li] = matmul_trans_a(cache.inputs[li - 1], d_prod);
                d_in = matmul_trans_b(d_prod, p.weights[li]);
            }
        } else {
            const std::size_t q = p.weights[li].cols;
            if (li == 0) {
                const std::size_t d = p.dims[0];
                grads[0] = Mat(p.weights[0].rows, p.weights[0].cols);
                for (std::size_t i = 0; i < d_pre.rows; ++i) {
                    const double* drow = d_pre.data.data() + i * q;
                    for (const FeatureEntry& f : cache.x0[i]) {
                        double* grow =
                            grads[0].data.data() + static_cast<std::size_t>(f.index) * q;
                        for (std::size_t c = 0; c < q; ++c) grow[c] += f.value * drow[c];
                    }
                    const auto& nbrs = topo.neighbors[i];
                    if (nbrs.empty()) continue;
                    const double inv = 1.0 / static_cast<double>(nbrs.size());
                    for (int j : nbrs) {
                        for (const FeatureEntry& f : cache.x0[static_cast<std::size_t>(j)]) {
                            double* grow = grads[0].data.data() +
                                           (d + static_cast<std::size_t>(f.index)) * q;
                            const double v = f.value * inv;
                            for (std::size_t c = 0; c < q; ++c) grow[c] += v * drow[c];
                        }
                    }
                }
            } else {
                const Mat& input = cache.inputs[li - 1];
                const std::size_t width = input.cols;
                const Mat mean = neighbor_mean(input, topo.neighbors);

                grads[li] = Mat(p.weights[li].rows, q);
                // dW = [input | mean]^T * d_pre, block by block.
                for (std::size_t i = 0; i < input.rows; ++i) {
                    const double* drow = d_pre.data.data() + i * q;
                    const double* srow = input.data.data() + i * width;
                    const double* mrow = mean.data.data() + i * width;
                    for (std::size_t r = 0; r < width; ++r) {
                        if (srow[r] != 0.0) {
                            double* grow = grads[li].data.data() + r * q;
                            for (std::size_t c = 0; c < q; ++c) grow[c] += srow[r] * drow[c];
                        }
                        if (mrow[r] != 0.0) {
                            double* grow = grads[li].data.data() + (width + r) * q;
                            for (std::size_t c = 0; c < q; ++c) grow[c] += mrow[r] * drow[c];
                        }
                    }
                }

                // d_concat = d_pre * W^T, split into self and mean halves.
                d_in = Mat(input.rows, width);
                Mat d_mean(input.rows, width);
                for (std::size_t i = 0; i < input.rows; ++i) {
                    const double* drow = d_pre.data.data() + i * q;
                    double* irow = d_in.data.data() + i * width;
                    double* mrow = d_mean.data.data() + i * width;
                    for (std::size_t r = 0; r < width; ++r) {
                        const double* w_self = p.weights[li].data.data() + r * q;
                        const double* w_mean = p.weights[li].data.data() + (width + r) * q;
                        double acc_s = 0.0, acc_m = 0.0;
                        for (std::size_t c = 0; c < q; ++c) {
                            acc_s += drow[c] * w_self[c];
                            acc_m += drow[c] * w_mean[c];
                        }
                        irow[r] = acc_s;
                        mrow[r] = acc_m;
                    }
                }
                // Mean distributes its gradient evenly over the neighbors.
                for (std::size_t i = 0; i < input.rows; ++i) {
                    const auto& nbrs = topo.neighbors[i];
                    if (nbrs.empty()) continue;
                    const double inv = 1.0 / static_cast<double>(nbrs.size());
                    const double* mrow = d_mean.data.data() + i * width;
                    for (int j : nbrs) {
                        double* irow = d_in.data.data() + static_cast<std::size_t>(j) * width;
                        for (std::size_t r = 0; r < width; ++r) irow[r] += inv * mrow[r];
                    }
                }
            }
        }

        if (li == 0) break;
        // Back through the dropout on this layer's input.
        if (!cache.masks.empty()) {
            const Mat& mask = cache.masks[li - 1];
            for (std::size_t i = 0; i < d_in.data.size(); ++i) d_in.data[i] *= mask.data[i];
        }
        d_out = std::move(d_in);
    }
    return grads;
}

Mat run_aggregator(const SparseGraph& g, const GraphTopology& topo, const AggregatorParams& p,
                   double dropout, bool training, std::uint64_t seed, bool relu_last) {
    Rng rng(seed);
    AggregatorCache cache = aggregator_forward(g, topo, p, dropout, training, relu_last, rng);
    return cache.final_output();
}

} // namespace figraph
