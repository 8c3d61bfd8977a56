#include "mpqa/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace mpqa {

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != static_cast<size_t>(rows) * cols) {
    throw ShapeMismatch("Matrix: value count " + std::to_string(data_.size()) + " does not match shape " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::full(int rows, int cols, double v) {
  Matrix m(rows, cols);
  std::fill(m.data_.begin(), m.data_.end(), v);
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(const std::vector<double>& v) {
  return Matrix(1, static_cast<int>(v.size()), v);
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

std::vector<double> Matrix::row_copy(int r) const {
  return std::vector<double>(data_.begin() + static_cast<size_t>(r) * cols_,
                             data_.begin() + static_cast<size_t>(r + 1) * cols_);
}

void Matrix::set_row(int r, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != cols_) {
    throw ShapeMismatch("set_row: width " + std::to_string(v.size()) + " vs cols " + std::to_string(cols_));
  }
  std::copy(v.begin(), v.end(), data_.begin() + static_cast<size_t>(r) * cols_);
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (!same_shape(o)) throw ShapeMismatch("operator+=: " + shape_str() + " vs " + o.shape_str());
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: " + a.shape_str() + " * " + b.shape_str());
  }
  Matrix c(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<size_t>(i) * k;
    double* crow = c.data() + static_cast<size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + static_cast<size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix transposed(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("hadamard: " + a.shape_str() + " vs " + b.shape_str());
  Matrix c(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
  if (!y.same_shape(x)) throw ShapeMismatch("axpy: " + y.shape_str() + " vs " + x.shape_str());
  for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double sum_all(const Matrix& a) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i];
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("max_abs_diff: " + a.shape_str() + " vs " + b.shape_str());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace mpqa
