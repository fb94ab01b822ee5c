#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "scusum/errors.hpp"

namespace scusum {

using Vec = std::vector<double>;

// Dense row-major matrix. Everything in this library is small (k up to a few
// hundred), so no effort is spent on blocking or expression templates.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Vec col(std::size_t j) const {
        Vec out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool operator==(const Mat&) const = default;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y = A x
inline void matvec(const Mat& a, std::span<const double> x, Vec& y) {
    if (x.size() != a.cols()) throw InvalidInput("matvec: dimension mismatch");
    y.assign(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
}

inline Vec matvec(const Mat& a, std::span<const double> x) {
    Vec y;
    matvec(a, x, y);
    return y;
}

// y = A^T x
inline void mat_t_vec(const Mat& a, std::span<const double> x, Vec& y) {
    if (x.size() != a.rows()) throw InvalidInput("mat_t_vec: dimension mismatch");
    y.assign(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        const auto row = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * xi;
    }
}

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw InvalidInput("matmul: dimension mismatch");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
        }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// A += alpha * x x^T
inline void add_outer(Mat& a, std::span<const double> x, double alpha = 1.0) {
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = alpha * x[i];
        auto row = a.row(i);
        for (std::size_t j = 0; j < n; ++j) row[j] += xi * x[j];
    }
}

inline double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

inline bool all_finite(const Mat& a) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (!std::isfinite(a(i, j))) return false;
    return true;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// |A[i][j] - A[j][i]| <= 1e-12 * max(1, max |A|)
inline bool is_symmetric(const Mat& a, double rel_tol = 1e-12) {
    if (a.rows() != a.cols()) return false;
    double amax = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) amax = std::max(amax, std::abs(a(i, j)));
    const double tol = rel_tol * std::max(1.0, amax);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

}  // namespace scusum
