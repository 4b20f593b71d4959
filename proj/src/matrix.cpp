#include "figraph/matrix.hpp"

#include <cmath>
#include <string>

#include "figraph/error.hpp"

namespace figraph {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ShapeError(what);
}

std::string shape_str(const Mat& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

} // namespace

Mat matmul(const Mat& a, const Mat& b) {
    require(a.cols == b.rows, "matmul: " + shape_str(a) + " * " + shape_str(b));
    Mat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        double* orow = out.data.data() + i * out.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Mat matmul_trans_a(const Mat& a, const Mat& b) {
    require(a.rows == b.rows, "matmul_trans_a: " + shape_str(a) + "^T * " + shape_str(b));
    Mat out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + k * a.cols;
        const double* brow = b.data.data() + k * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.data.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Mat matmul_trans_b(const Mat& a, const Mat& b) {
    require(a.cols == b.cols, "matmul_trans_b: " + shape_str(a) + " * " + shape_str(b) + "^T");
    Mat out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        double* orow = out.data.data() + i * out.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.data.data() + j * b.cols;
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            orow[j] = acc;
        }
    }
    return out;
}

void add_inplace(Mat& a, const Mat& b) {
    require(a.same_shape(b), "add_inplace: " + shape_str(a) + " vs " + shape_str(b));
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void axpy_inplace(Mat& a, double s, const Mat& b) {
    require(a.same_shape(b), "axpy_inplace: " + shape_str(a) + " vs " + shape_str(b));
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

void scale_inplace(Mat& a, double s) {
    for (double& v : a.data) v *= s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double max_abs(const Mat& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    require(a.same_shape(b), "max_abs_diff: " + shape_str(a) + " vs " + shape_str(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

bool all_finite(const Mat& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace figraph
