#include "doctest.h"
#include "mpqa/matrix.hpp"

using mpqa::Matrix;

TEST_SUITE("matrix") {

TEST_CASE("construction and element access") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  for (size_t i = 0; i < m.size(); ++i) CHECK(m[i] == 0.0);

  m.at(1, 2) = 5.0;
  CHECK(m[5] == 5.0);  // row-major

  Matrix r = Matrix::row_vector({1.0, 2.0});
  CHECK(r.rows() == 1);
  CHECK(r.at(0, 1) == 2.0);

  CHECK(Matrix::identity(3).at(1, 1) == 1.0);
  CHECK(Matrix::identity(3).at(0, 1) == 0.0);
  CHECK(Matrix::scalar(4.5).shape_str() == "1x1");
  CHECK(Matrix::full(2, 2, 3.0)[3] == 3.0);
}

TEST_CASE("bad init vector length throws") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), mpqa::ShapeMismatch);
}

TEST_CASE("matmul matches hand-computed product") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix b(3, 1, {7, 8, 9});
  Matrix c = matmul(a, b);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 1);
  CHECK(c.at(0, 0) == 50.0);
  CHECK(c.at(1, 0) == 122.0);
}

TEST_CASE("matmul shape mismatch throws") {
  Matrix a(2, 3);
  Matrix b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), mpqa::ShapeMismatch);
}

TEST_CASE("matmul against identity is a no-op") {
  Matrix a(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(max_abs_diff(matmul(a, Matrix::identity(3)), a) == 0.0);
  CHECK(max_abs_diff(matmul(Matrix::identity(3), a), a) == 0.0);
}

TEST_CASE("transpose") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix t = transposed(a);
  REQUIRE(t.rows() == 3);
  REQUIRE(t.cols() == 2);
  CHECK(t.at(0, 1) == 4.0);
  CHECK(t.at(2, 0) == 3.0);
  CHECK(max_abs_diff(transposed(t), a) == 0.0);
}

TEST_CASE("hadamard and axpy") {
  Matrix a(1, 3, {1, 2, 3});
  Matrix b(1, 3, {4, 5, 6});
  Matrix h = hadamard(a, b);
  CHECK(h[0] == 4.0);
  CHECK(h[2] == 18.0);

  axpy(a, 2.0, b);
  CHECK(a[0] == 9.0);
  CHECK(a[2] == 15.0);
  CHECK_THROWS_AS(axpy(a, 1.0, Matrix(2, 2)), mpqa::ShapeMismatch);
}

TEST_CASE("sum_all and compound ops") {
  Matrix a(2, 2, {1, 2, 3, 4});
  CHECK(sum_all(a) == 10.0);
  a *= 2.0;
  CHECK(a[3] == 8.0);
  a += Matrix::full(2, 2, 1.0);
  CHECK(sum_all(a) == 24.0);
}

TEST_CASE("row copy and set_row") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  auto r = a.row_copy(1);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == 4.0);
  a.set_row(0, {9.0, 9.0, 9.0});
  CHECK(a.at(0, 2) == 9.0);
  CHECK_THROWS_AS(a.set_row(0, {1.0}), mpqa::ShapeMismatch);
}

}  // TEST_SUITE
