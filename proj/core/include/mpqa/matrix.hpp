#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpqa {

struct ShapeMismatch : std::invalid_argument {
  explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Dense row-major float64 matrix. Scalars are 1x1, row vectors 1xN.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}
  Matrix(int rows, int cols, std::vector<double> data);

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix full(int rows, int cols, double v);
  static Matrix identity(int n);
  static Matrix scalar(double v) { return Matrix(1, 1, {v}); }
  static Matrix row_vector(const std::vector<double>& v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  std::vector<double> row_copy(int r) const;
  void set_row(int r, const std::vector<double>& v);

  Matrix& operator+=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transposed(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// y += alpha * x (shapes must match).
void axpy(Matrix& y, double alpha, const Matrix& x);

double sum_all(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace mpqa
