#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mpqa/grad_check.hpp"
#include "mpqa/rasa.hpp"

using mpqa::AttentionTrace;
using mpqa::Matrix;
using mpqa::ParameterStore;
using mpqa::RasaStack;
using mpqa::RpbCell;
using mpqa::RpbMask;
using mpqa::Tape;
using mpqa::Value;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = mpqa::uniform_range(rng, -1.0, 1.0);
  return m;
}

// Single-head reference layer written with bare scalar loops; no tape, no
// shared helpers beyond parameter storage.
Matrix naive_single_head_layer(const Matrix& x, int n_lm, const ParameterStore& s,
                               const std::string& prefix, const RpbMask& mask, double omega1,
                               double omega2) {
  const int n = x.rows(), d = x.cols();
  const double eps = 1e-5;

  auto layer_norm = [&](const Matrix& in, const Matrix& gain, const Matrix& bias) {
    Matrix out(in.rows(), d);
    for (int i = 0; i < in.rows(); ++i) {
      double mu = 0.0;
      for (int j = 0; j < d; ++j) mu += in.at(i, j);
      mu /= d;
      double var = 0.0;
      for (int j = 0; j < d; ++j) var += (in.at(i, j) - mu) * (in.at(i, j) - mu);
      var /= d;
      for (int j = 0; j < d; ++j) {
        out.at(i, j) = (in.at(i, j) - mu) / std::sqrt(var + eps) * gain.at(0, j) + bias.at(0, j);
      }
    }
    return out;
  };
  auto product = [](const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) {
        double acc = 0.0;
        for (int k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
        c.at(i, j) = acc;
      }
    return c;
  };
  auto gelu = [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); };

  const std::string lb = prefix + ".l0";
  Matrix normed = layer_norm(x, s.get(lb + ".ln1.gain").value, s.get(lb + ".ln1.bias").value);

  Matrix shifted = normed;
  const Matrix& e_lm = s.get(prefix + ".e_lm").value;
  const Matrix& e_kg = s.get(prefix + ".e_kg").value;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) shifted.at(i, j) += (i < n_lm ? e_lm : e_kg).at(0, j);

  Matrix q = product(shifted, s.get(lb + ".h0.wq").value);
  Matrix k = product(shifted, s.get(lb + ".h0.wk").value);
  Matrix v = product(normed, s.get(lb + ".h0.wv").value);

  Matrix scores(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += q.at(i, c) * k.at(j, c);
      scores.at(i, j) = acc / std::sqrt(static_cast<double>(d));
    }
  for (const RpbCell& c : mask.omega1_cells) scores.at(c.row, c.col) += omega1;
  for (const RpbCell& c : mask.omega2_cells) scores.at(c.row, c.col) += omega2;

  Matrix attn(n, n);
  for (int i = 0; i < n; ++i) {
    double mx = scores.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, scores.at(i, j));
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(scores.at(i, j) - mx);
    for (int j = 0; j < n; ++j) attn.at(i, j) = std::exp(scores.at(i, j) - mx) / denom;
  }

  Matrix merged = product(attn, v);
  Matrix attended = product(merged, s.get(lb + ".wo").value);
  Matrix mid(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      mid.at(i, j) = attended.at(i, j) + s.get(lb + ".bo").value.at(0, j) + x.at(i, j);
    }

  Matrix normed2 = layer_norm(mid, s.get(lb + ".ln2.gain").value, s.get(lb + ".ln2.bias").value);
  Matrix hidden = product(normed2, s.get(lb + ".ffn.w1").value);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4 * d; ++j) hidden.at(i, j) = gelu(hidden.at(i, j) + s.get(lb + ".ffn.b1").value.at(0, j));
  Matrix ffn = product(hidden, s.get(lb + ".ffn.w2").value);
  Matrix out(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      out.at(i, j) = ffn.at(i, j) + s.get(lb + ".ffn.b2").value.at(0, j) + mid.at(i, j);
    }
  return out;
}

RpbMask empty_mask(int tokens) {
  RpbMask m;
  m.tokens = tokens;
  return m;
}

}  // namespace

TEST_SUITE("rasa") {

TEST_CASE("head count must divide the model width") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(RasaStack(store, "r", 6, 1, 4, rng), mpqa::ShapeMismatch);
  ParameterStore store2;
  CHECK_NOTHROW(RasaStack(store2, "r", 8, 2, 2, rng));
  CHECK(store2.contains("r.l1.h1.omega2"));
  CHECK(store2.contains("r.e_lm"));
}

TEST_CASE("omega parameter names enumerate layer-major") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  RasaStack stack(store, "r", 4, 2, 2, rng);
  auto names = stack.omega_param_names();
  REQUIRE(names.size() == 8);
  CHECK(names[0] == "r.l0.h0.omega1");
  CHECK(names[3] == "r.l0.h1.omega2");
  CHECK(names[7] == "r.l1.h1.omega2");
  for (const auto& n : names) CHECK(store.contains(n));
}

TEST_CASE("a lone token attends only to itself") {
  ParameterStore store;
  std::mt19937_64 rng(2);
  RasaStack stack(store, "r", 4, 1, 2, rng);
  Tape t;
  AttentionTrace trace;
  stack.forward(t, t.constant(random_matrix(1, 4, rng)), 1, empty_mask(1), &trace);
  REQUIRE(trace.maps.size() == 2);
  for (const auto& m : trace.maps) {
    REQUIRE(m.weights.rows() == 1);
    CHECK(m.weights.at(0, 0) == 1.0);
  }
}

TEST_CASE("attention rows sum to one for every layer and head") {
  ParameterStore store;
  std::mt19937_64 rng(3);
  RasaStack stack(store, "r", 8, 2, 2, rng);
  Tape t;
  AttentionTrace trace;
  stack.forward(t, t.constant(random_matrix(7, 8, rng)), 3, empty_mask(7), &trace);
  REQUIRE(trace.maps.size() == 4);
  for (const auto& m : trace.maps) {
    for (int i = 0; i < m.weights.rows(); ++i) {
      double s = 0.0;
      for (int j = 0; j < m.weights.cols(); ++j) s += m.weights.at(i, j);
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("zero-valued bias scalars reproduce the unbiased layer exactly") {
  ParameterStore store;
  std::mt19937_64 rng(4);
  RasaStack stack(store, "r", 4, 1, 1, rng);  // omegas init to 0

  RpbMask with_cells = empty_mask(5);
  with_cells.omega1_cells = {{3, 1}, {4, 2}};
  with_cells.omega2_cells = {{1, 3}};

  Matrix x = random_matrix(5, 4, rng);
  Tape t1, t2;
  const Matrix& a = t1.value(stack.forward(t1, t1.constant(x), 2, with_cells));
  const Matrix& b = t2.value(stack.forward(t2, t2.constant(x), 2, empty_mask(5)));
  CHECK(mpqa::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("matches the naive single-head reference within 1e-10") {
  ParameterStore store;
  std::mt19937_64 rng(5);
  RasaStack stack(store, "r", 4, 1, 1, rng);
  store.get("r.e_lm").value = random_matrix(1, 4, rng);
  store.get("r.e_kg").value = random_matrix(1, 4, rng);
  store.get("r.l0.h0.omega1").value = Matrix::scalar(0.3);
  store.get("r.l0.h0.omega2").value = Matrix::scalar(-0.2);
  store.get("r.l0.ln1.gain").value = random_matrix(1, 4, rng);
  store.get("r.l0.ln2.bias").value = random_matrix(1, 4, rng);

  RpbMask mask = empty_mask(6);
  mask.omega1_cells = {{4, 1}, {5, 2}};  // graph rows, context cols
  mask.omega2_cells = {{1, 4}, {2, 5}};

  Matrix x = random_matrix(6, 4, rng);
  Tape t;
  const Matrix& got = t.value(stack.layer_forward(t, t.constant(x), 3, mask, 0));
  Matrix want = naive_single_head_layer(x, 3, store, "r", mask, 0.3, -0.2);
  CHECK(mpqa::max_abs_diff(got, want) < 1e-10);
}

TEST_CASE("zero layers is the identity") {
  ParameterStore store;
  std::mt19937_64 rng(6);
  RasaStack stack(store, "r", 4, 0, 2, rng);
  Tape t;
  Matrix x = random_matrix(3, 4, rng);
  const Matrix& out = t.value(stack.forward(t, t.constant(x), 1, empty_mask(3)));
  CHECK(mpqa::max_abs_diff(out, x) == 0.0);
}

TEST_CASE("the stack is the composition of its layers") {
  ParameterStore store;
  std::mt19937_64 rng(7);
  RasaStack stack(store, "r", 8, 2, 2, rng);
  Matrix x = random_matrix(5, 8, rng);
  RpbMask mask = empty_mask(5);
  mask.omega1_cells = {{3, 0}};
  for (const auto& name : stack.omega_param_names()) store.get(name).value = Matrix::scalar(0.1);

  Tape t;
  const Matrix& whole = t.value(stack.forward(t, t.constant(x), 2, mask));
  Tape t2;
  Value step = stack.layer_forward(t2, t2.constant(x), 2, mask, 0);
  const Matrix& composed = t2.value(stack.layer_forward(t2, step, 2, mask, 1));
  CHECK(mpqa::max_abs_diff(whole, composed) == 0.0);
}

TEST_CASE("permuting graph rows permutes graph outputs and fixes context rows") {
  ParameterStore store;
  std::mt19937_64 rng(8);
  RasaStack stack(store, "r", 8, 2, 2, rng);
  for (const auto& name : stack.omega_param_names()) store.get(name).value = Matrix::scalar(0.25);

  const int n_lm = 3, n = 8;
  Matrix x = random_matrix(n, 8, rng);
  RpbMask mask = empty_mask(n);
  mask.omega1_cells = {{4, 1}, {6, 2}};
  mask.omega2_cells = {{1, 5}, {2, 4}};

  // permutation of the graph block: old row -> new row
  std::vector<int> perm = {0, 1, 2, 6, 3, 7, 5, 4};
  Matrix px(n, 8);
  for (int i = 0; i < n; ++i) px.set_row(perm[i], x.row_copy(i));
  RpbMask pmask = empty_mask(n);
  auto remap = [&](const RpbCell& c) { return RpbCell{perm[c.row], perm[c.col]}; };
  for (const auto& c : mask.omega1_cells) pmask.omega1_cells.push_back(remap(c));
  for (const auto& c : mask.omega2_cells) pmask.omega2_cells.push_back(remap(c));

  Tape t1, t2;
  const Matrix& base = t1.value(stack.forward(t1, t1.constant(x), n_lm, mask));
  const Matrix& permuted = t2.value(stack.forward(t2, t2.constant(px), n_lm, pmask));

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 8; ++j) {
      CHECK(std::abs(permuted.at(perm[i], j) - base.at(i, j)) < 1e-9);
    }
  }
}

TEST_CASE("a heavily biased cell dominates its attention row") {
  ParameterStore store;
  std::mt19937_64 rng(9);
  RasaStack stack(store, "r", 4, 1, 1, rng);
  store.get("r.l0.h0.omega1").value = Matrix::scalar(30.0);

  RpbMask mask = empty_mask(5);
  mask.omega1_cells = {{3, 1}};

  Tape t;
  AttentionTrace trace;
  stack.forward(t, t.constant(random_matrix(5, 4, rng)), 2, mask, &trace);
  CHECK(trace.maps[0].weights.at(3, 1) > 0.99);
}

TEST_CASE("rejects inconsistent sizes") {
  ParameterStore store;
  std::mt19937_64 rng(10);
  RasaStack stack(store, "r", 4, 1, 1, rng);
  Tape t;
  Value x = t.constant(random_matrix(4, 4, rng));
  CHECK_THROWS_AS(stack.forward(t, x, 1, empty_mask(5)), mpqa::SizeMismatch);
  CHECK_THROWS_AS(stack.forward(t, x, 9, empty_mask(4)), mpqa::ShapeMismatch);
  Value narrow = t.constant(random_matrix(4, 3, rng));
  CHECK_THROWS_AS(stack.forward(t, narrow, 1, empty_mask(4)), mpqa::ShapeMismatch);
}

TEST_CASE("gradients through two layers and two heads check out") {
  ParameterStore store;
  std::mt19937_64 rng(11);
  RasaStack stack(store, "r", 8, 2, 2, rng);
  for (const auto& name : stack.omega_param_names()) store.get(name).value = Matrix::scalar(0.15);

  Matrix x = random_matrix(6, 8, rng);
  RpbMask mask = empty_mask(6);
  mask.omega1_cells = {{4, 1}, {5, 2}};
  mask.omega2_cells = {{1, 4}};

  auto build = [&](Tape& t) {
    return t.sum(t.tanh_act(stack.forward(t, t.constant(x), 3, mask)));
  };
  auto report = mpqa::grad_check(store, build);
  CAPTURE(report.worst_param);
  CAPTURE(report.worst_analytic);
  CAPTURE(report.worst_numeric);
  CHECK(report.max_rel_error < 1e-4);
  CHECK(report.probes == store.scalar_count());
}

}  // TEST_SUITE
