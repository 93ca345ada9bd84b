#include "sdnc/linalg.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace sdnc {

bool DenseVector::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool DenseMatrix::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool SimplexVector::is_valid(std::span<const double> w) {
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= 1e-12;
}

SimplexVector SimplexVector::checked(DenseVector w) {
    if (!is_valid(w.span())) {
        throw std::invalid_argument("not a probability simplex");
    }
    return SimplexVector(std::move(w));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void softmax_in_place(std::span<double> v) {
    double m = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > m) m = v[i];
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::exp(v[i] - m);
        denom += v[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] /= denom;
}

double attention_scale(std::size_t dim) {
    return 1.0 / std::sqrt(static_cast<double>(dim));
}

SimplexVector softmax_stable(const DenseVector& scores) {
    if (scores.size() == 0) throw EmptyInput("softmax of empty vector");
    if (!scores.all_finite()) throw NonFiniteInput("softmax of non-finite scores");
    DenseVector out = scores;
    softmax_in_place(out.span());
    return SimplexVector(std::move(out));
}

DenseVector matvec(const DenseMatrix& m, const DenseVector& v) {
    if (m.cols != v.size()) {
        throw ShapeError("matvec: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                         " times vector of length " + std::to_string(v.size()));
    }
    DenseVector out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out[i] = dot(m.row_span(i), v.span());
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
    DenseMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        std::span<const double> arow = a.row_span(i);
        for (std::size_t j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
    }
    return out;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const DenseVector& a, const DenseVector& b) {
    return bitwise_equal(a.span(), b.span());
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) return false;
    return bitwise_equal(std::span<const double>(a.data), std::span<const double>(b.data));
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = std::abs(a.data[i] - b.data[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

}  // namespace sdnc
