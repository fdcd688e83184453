#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace crossrec {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. All model tensors are stored this way;
/// a bias or head vector is simply a 1 x n matrix's worth of storage kept as
/// a plain Vector.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) {
    if (r >= rows_) throw std::out_of_range("DenseMatrix::row");
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    if (r >= rows_) throw std::out_of_range("DenseMatrix::row");
    return {data_.data() + r * cols_, cols_};
  }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// y = W x, with a shape check. Plain loops; everything in this project is
/// desk scale.
inline Vector matvec(const DenseMatrix& W, std::span<const double> x) {
  if (x.size() != W.cols()) throw std::invalid_argument("matvec: shape mismatch");
  Vector y(W.rows(), 0.0);
  for (std::size_t r = 0; r < W.rows(); ++r) {
    double s = 0.0;
    const double* wr = W.data().data() + r * W.cols();
    for (std::size_t c = 0; c < W.cols(); ++c) s += wr[c] * x[c];
    y[r] = s;
  }
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace crossrec
