#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace figraph {

/// Dense row-major matrix of doubles. The workhorse container for node
/// embeddings, weights and gradients; kept deliberately small.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }

    void fill(double v) { data.assign(data.size(), v); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

/// a (r x k) * b (k x c)
Mat matmul(const Mat& a, const Mat& b);

/// a^T (k x r)^T * b (k x c)  ->  (r x c)
Mat matmul_trans_a(const Mat& a, const Mat& b);

/// a (r x k) * b^T (c x k)^T  ->  (r x c)
Mat matmul_trans_b(const Mat& a, const Mat& b);

void add_inplace(Mat& a, const Mat& b);
void axpy_inplace(Mat& a, double s, const Mat& b); // a += s * b
void scale_inplace(Mat& a, double s);

double dot(std::span<const double> a, std::span<const double> b);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

bool all_finite(const Mat& a);

} // namespace figraph
