#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sdnc/errors.hpp"

namespace sdnc {

// All numeric state is 64-bit IEEE. Every reduction runs strictly left to
// right in increasing index order; that order is part of each operation's
// contract, so independent computation paths can be compared bit for bit.

struct DenseVector {
    std::vector<double> data;

    DenseVector() = default;
    explicit DenseVector(std::size_t n) : data(n, 0.0) {}
    DenseVector(std::initializer_list<double> init) : data(init) {}
    explicit DenseVector(std::span<const double> s) : data(s.begin(), s.end()) {}

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    std::span<const double> span() const { return {data.data(), data.size()}; }
    std::span<double> span() { return {data.data(), data.size()}; }

    bool all_finite() const;
};

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row_span(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
    std::span<double> row_span(std::size_t r) { return {data.data() + r * cols, cols}; }

    DenseVector row(std::size_t r) const { return DenseVector(row_span(r)); }

    static DenseMatrix identity(std::size_t n);

    bool all_finite() const;
};

// Probability weights: nonnegative entries summing to 1 within 1e-12.
// softmax_stable is the normal producer; checked() validates any other
// construction and throws on violation.
class SimplexVector {
  public:
    static bool is_valid(std::span<const double> w);
    static SimplexVector checked(DenseVector w);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const DenseVector& values() const { return w_; }

  private:
    friend SimplexVector softmax_stable(const DenseVector&);
    explicit SimplexVector(DenseVector w) : w_(std::move(w)) {}
    DenseVector w_;
};

// Shared scalar kernels, compiled exactly once. Every computation path in
// the library funnels its floating-point work through these, which pins the
// arithmetic down to one instruction sequence.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// Requires a non-empty span of finite values. Shifts by the max before
// exponentiating; the shift is mandatory, not an optimization.
void softmax_in_place(std::span<double> v);
// 1 / sqrt(dim), the logit scale used by every read path.
double attention_scale(std::size_t dim);

SimplexVector softmax_stable(const DenseVector& scores);
DenseVector matvec(const DenseMatrix& m, const DenseVector& v);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& m);

bool bitwise_equal(std::span<const double> a, std::span<const double> b);
bool bitwise_equal(const DenseVector& a, const DenseVector& b);
bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace sdnc
