#include "mpqa/tape.hpp"

#include <cmath>
#include <limits>

namespace mpqa {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

int Tape::check(Value v) const {
  if (!v.valid() || v.idx >= static_cast<int>(nodes_.size())) {
    throw std::logic_error("Value handle does not belong to this tape");
  }
  return v.idx;
}

Value Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop) {
  Node n;
  if (requires_grad) n.grad = Matrix::zeros(value.rows(), value.cols());
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = requires_grad ? std::move(backprop) : std::function<void(Tape&)>{};
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Value v, const Matrix& g) {
  Node& n = nodes_[check(v)];
  if (!n.requires_grad) return;
  n.grad += g;
}

double Tape::scalar(Value v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ShapeMismatch("scalar: value is " + m.shape_str());
  return m.at(0, 0);
}

Value Tape::constant(Matrix m) { return push(std::move(m), false, {}); }

Value Tape::leaf(Matrix m, bool requires_grad) { return push(std::move(m), requires_grad, {}); }

Value Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Value{it->second};
  Value v = push(p.value, true, {});
  nodes_[v.idx].bound = &p;
  param_nodes_.emplace(&p, v.idx);
  return v;
}

Value Tape::matmul(Value a, Value b) {
  Matrix out = mpqa::matmul(value(a), value(b));
  const bool req = needs_grad(a) || needs_grad(b);
  return push(std::move(out), req, [a, b, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    if (t.needs_grad(a)) t.accumulate(a, mpqa::matmul(g, transposed(t.value(b))));
    if (t.needs_grad(b)) t.accumulate(b, mpqa::matmul(transposed(t.value(a)), g));
  });
}

Value Tape::add(Value a, Value b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeMismatch("add: " + av.shape_str() + " vs " + bv.shape_str());
  Matrix out = av;
  out += bv;
  const bool req = needs_grad(a) || needs_grad(b);
  return push(std::move(out), req, [a, b, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Value Tape::sub(Value a, Value b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeMismatch("sub: " + av.shape_str() + " vs " + bv.shape_str());
  Matrix out = av;
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const bool req = needs_grad(a) || needs_grad(b);
  return push(std::move(out), req, [a, b, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    t.accumulate(a, g);
    if (t.needs_grad(b)) {
      Matrix neg = g;
      neg *= -1.0;
      t.accumulate(b, neg);
    }
  });
}

Value Tape::scale(Value a, double s) {
  Matrix out = value(a);
  out *= s;
  return push(std::move(out), needs_grad(a), [a, s, v_idx = nodes_.size()](Tape& t) {
    Matrix g = t.nodes_[v_idx].grad;
    g *= s;
    t.accumulate(a, g);
  });
}

Value Tape::transpose(Value a) {
  return push(transposed(value(a)), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    t.accumulate(a, transposed(t.nodes_[v_idx].grad));
  });
}

Value Tape::concat_rows(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: empty");
  const int cols = value(parts[0]).cols();
  int rows = 0;
  bool req = false;
  for (Value p : parts) {
    const Matrix& m = value(p);
    if (m.cols() != cols) throw ShapeMismatch("concat_rows: column mismatch");
    rows += m.rows();
    req = req || needs_grad(p);
  }
  Matrix out(rows, cols);
  int r = 0;
  for (Value p : parts) {
    const Matrix& m = value(p);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < cols; ++j) out.at(r + i, j) = m.at(i, j);
    r += m.rows();
  }
  std::vector<Value> owned(parts.begin(), parts.end());
  return push(std::move(out), req, [owned, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    int r = 0;
    for (Value p : owned) {
      const Matrix& m = t.value(p);
      if (t.needs_grad(p)) {
        Matrix gp(m.rows(), m.cols());
        for (int i = 0; i < m.rows(); ++i)
          for (int j = 0; j < m.cols(); ++j) gp.at(i, j) = g.at(r + i, j);
        t.accumulate(p, gp);
      }
      r += m.rows();
    }
  });
}

Value Tape::concat_cols(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: empty");
  const int rows = value(parts[0]).rows();
  int cols = 0;
  bool req = false;
  for (Value p : parts) {
    const Matrix& m = value(p);
    if (m.rows() != rows) throw ShapeMismatch("concat_cols: row mismatch");
    cols += m.cols();
    req = req || needs_grad(p);
  }
  Matrix out(rows, cols);
  int c = 0;
  for (Value p : parts) {
    const Matrix& m = value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < m.cols(); ++j) out.at(i, c + j) = m.at(i, j);
    c += m.cols();
  }
  std::vector<Value> owned(parts.begin(), parts.end());
  return push(std::move(out), req, [owned, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    int c = 0;
    for (Value p : owned) {
      const Matrix& m = t.value(p);
      if (t.needs_grad(p)) {
        Matrix gp(m.rows(), m.cols());
        for (int i = 0; i < m.rows(); ++i)
          for (int j = 0; j < m.cols(); ++j) gp.at(i, j) = g.at(i, c + j);
        t.accumulate(p, gp);
      }
      c += m.cols();
    }
  });
}

Value Tape::slice_rows(Value a, int begin, int end) {
  const Matrix& m = value(a);
  if (begin < 0 || end > m.rows() || begin > end) throw ShapeMismatch("slice_rows: bad range");
  Matrix out(end - begin, m.cols());
  for (int i = begin; i < end; ++i)
    for (int j = 0; j < m.cols(); ++j) out.at(i - begin, j) = m.at(i, j);
  return push(std::move(out), needs_grad(a), [a, begin, end, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& m = t.value(a);
    Matrix ga(m.rows(), m.cols());
    for (int i = begin; i < end; ++i)
      for (int j = 0; j < m.cols(); ++j) ga.at(i, j) = g.at(i - begin, j);
    t.accumulate(a, ga);
  });
}

Value Tape::gather_rows(Value a, std::vector<int> indices) {
  const Matrix& m = value(a);
  for (int idx : indices) {
    if (idx < 0 || idx >= m.rows()) throw ShapeMismatch("gather_rows: index out of range");
  }
  Matrix out(static_cast<int>(indices.size()), m.cols());
  for (size_t i = 0; i < indices.size(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.at(static_cast<int>(i), j) = m.at(indices[i], j);
  return push(std::move(out), needs_grad(a), [a, indices, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& m = t.value(a);
    Matrix ga(m.rows(), m.cols());
    for (size_t i = 0; i < indices.size(); ++i)
      for (int j = 0; j < m.cols(); ++j) ga.at(indices[i], j) += g.at(static_cast<int>(i), j);
    t.accumulate(a, ga);
  });
}

Value Tape::add_row_broadcast(Value a, Value row) {
  return add_rows_block(a, row, 0, value(a).rows());
}

Value Tape::add_rows_block(Value a, Value row, int begin, int end) {
  const Matrix& m = value(a);
  const Matrix& r = value(row);
  if (r.rows() != 1 || r.cols() != m.cols()) {
    throw ShapeMismatch("add_rows_block: row is " + r.shape_str() + " for " + m.shape_str());
  }
  if (begin < 0 || end > m.rows() || begin > end) throw ShapeMismatch("add_rows_block: bad range");
  Matrix out = m;
  for (int i = begin; i < end; ++i)
    for (int j = 0; j < m.cols(); ++j) out.at(i, j) += r.at(0, j);
  const bool req = needs_grad(a) || needs_grad(row);
  return push(std::move(out), req, [a, row, begin, end, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    t.accumulate(a, g);
    if (t.needs_grad(row)) {
      Matrix gr(1, g.cols());
      for (int i = begin; i < end; ++i)
        for (int j = 0; j < g.cols(); ++j) gr.at(0, j) += g.at(i, j);
      t.accumulate(row, gr);
    }
  });
}

Value Tape::mean_rows(Value a) {
  const Matrix& m = value(a);
  if (m.rows() == 0) throw ShapeMismatch("mean_rows: empty matrix");
  Matrix out(1, m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.at(0, j) += m.at(i, j);
  out *= 1.0 / m.rows();
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& m = t.value(a);
    Matrix ga(m.rows(), m.cols());
    const double inv = 1.0 / m.rows();
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) ga.at(i, j) = g.at(0, j) * inv;
    t.accumulate(a, ga);
  });
}

Value Tape::sum(Value a) {
  Matrix out = Matrix::scalar(sum_all(value(a)));
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const double g = t.nodes_[v_idx].grad.at(0, 0);
    const Matrix& m = t.value(a);
    t.accumulate(a, Matrix::full(m.rows(), m.cols(), g));
  });
}

Value Tape::masked_scalar(Value s, Matrix pattern) {
  const Matrix& sv = value(s);
  if (sv.rows() != 1 || sv.cols() != 1) throw ShapeMismatch("masked_scalar: scalar is " + sv.shape_str());
  Matrix out = pattern;
  out *= sv.at(0, 0);
  return push(std::move(out), needs_grad(s), [s, pattern, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    double acc = 0.0;
    for (size_t i = 0; i < g.size(); ++i) acc += g[i] * pattern[i];
    t.accumulate(s, Matrix::scalar(acc));
  });
}

Value Tape::softmax_rows(Value a) {
  const Matrix& m = value(a);
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) mx = std::max(mx, m.at(i, j));
    if (!std::isfinite(mx)) continue;  // all -inf: leave the row at 0 weight
    double denom = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      const double e = std::exp(m.at(i, j) - mx);
      out.at(i, j) = e;
      denom += e;
    }
    for (int j = 0; j < m.cols(); ++j) out.at(i, j) /= denom;
  }
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& p = t.nodes_[v_idx].value;
    Matrix ga(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < p.cols(); ++j) dot += g.at(i, j) * p.at(i, j);
      for (int j = 0; j < p.cols(); ++j) ga.at(i, j) = p.at(i, j) * (g.at(i, j) - dot);
    }
    t.accumulate(a, ga);
  });
}

Value Tape::layer_norm(Value x, Value gain, Value bias, double eps) {
  const Matrix& m = value(x);
  const Matrix& g = value(gain);
  const Matrix& b = value(bias);
  if (g.rows() != 1 || g.cols() != m.cols() || b.rows() != 1 || b.cols() != m.cols()) {
    throw ShapeMismatch("layer_norm: gain/bias must be 1x" + std::to_string(m.cols()));
  }
  const int d = m.cols();
  Matrix xhat(m.rows(), d);
  Matrix inv_std(m.rows(), 1);
  Matrix out(m.rows(), d);
  for (int i = 0; i < m.rows(); ++i) {
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += m.at(i, j);
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = m.at(i, j) - mu;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std.at(i, 0) = inv;
    for (int j = 0; j < d; ++j) {
      xhat.at(i, j) = (m.at(i, j) - mu) * inv;
      out.at(i, j) = xhat.at(i, j) * g.at(0, j) + b.at(0, j);
    }
  }
  const bool req = needs_grad(x) || needs_grad(gain) || needs_grad(bias);
  return push(std::move(out), req,
              [x, gain, bias, xhat, inv_std, v_idx = nodes_.size()](Tape& t) {
                const Matrix& dy = t.nodes_[v_idx].grad;
                const Matrix& g = t.value(gain);
                const int d = dy.cols();
                if (t.needs_grad(x)) {
                  Matrix dx(dy.rows(), d);
                  for (int i = 0; i < dy.rows(); ++i) {
                    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                    for (int j = 0; j < d; ++j) {
                      const double dxh = dy.at(i, j) * g.at(0, j);
                      mean_dxhat += dxh;
                      mean_dxhat_xhat += dxh * xhat.at(i, j);
                    }
                    mean_dxhat /= d;
                    mean_dxhat_xhat /= d;
                    for (int j = 0; j < d; ++j) {
                      const double dxh = dy.at(i, j) * g.at(0, j);
                      dx.at(i, j) = inv_std.at(i, 0) * (dxh - mean_dxhat - xhat.at(i, j) * mean_dxhat_xhat);
                    }
                  }
                  t.accumulate(x, dx);
                }
                if (t.needs_grad(gain)) {
                  Matrix dg(1, d);
                  for (int i = 0; i < dy.rows(); ++i)
                    for (int j = 0; j < d; ++j) dg.at(0, j) += dy.at(i, j) * xhat.at(i, j);
                  t.accumulate(gain, dg);
                }
                if (t.needs_grad(bias)) {
                  Matrix db(1, d);
                  for (int i = 0; i < dy.rows(); ++i)
                    for (int j = 0; j < d; ++j) db.at(0, j) += dy.at(i, j);
                  t.accumulate(bias, db);
                }
              });
}

Value Tape::gelu(Value a) {
  const Matrix& m = value(a);
  Matrix out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) {
    out[i] = 0.5 * m[i] * (1.0 + std::erf(m[i] * kInvSqrt2));
  }
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& m = t.value(a);
    Matrix ga(m.rows(), m.cols());
    for (size_t i = 0; i < m.size(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(m[i] * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * m[i] * m[i]);
      ga[i] = g[i] * (cdf + m[i] * pdf);
    }
    t.accumulate(a, ga);
  });
}

Value Tape::tanh_act(Value a) {
  const Matrix& m = value(a);
  Matrix out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) out[i] = std::tanh(m[i]);
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& y = t.nodes_[v_idx].value;
    Matrix ga(y.rows(), y.cols());
    for (size_t i = 0; i < y.size(); ++i) ga[i] = g[i] * (1.0 - y[i] * y[i]);
    t.accumulate(a, ga);
  });
}

Value Tape::log1p_abs(Value a) {
  const Matrix& m = value(a);
  Matrix out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) out[i] = std::log1p(std::fabs(m[i]));
  return push(std::move(out), needs_grad(a), [a, v_idx = nodes_.size()](Tape& t) {
    const Matrix& g = t.nodes_[v_idx].grad;
    const Matrix& m = t.value(a);
    Matrix ga(m.rows(), m.cols());
    for (size_t i = 0; i < m.size(); ++i) {
      const double s = (m[i] > 0.0) ? 1.0 : (m[i] < 0.0 ? -1.0 : 0.0);
      ga[i] = g[i] * s / (1.0 + std::fabs(m[i]));
    }
    t.accumulate(a, ga);
  });
}

Value Tape::cross_entropy(Value logits, int target) {
  const Matrix& m = value(logits);
  if (m.rows() != 1) throw ShapeMismatch("cross_entropy: logits must be 1xC, got " + m.shape_str());
  if (target < 0 || target >= m.cols()) {
    throw TargetOutOfRange("cross_entropy: target " + std::to_string(target) + " for " +
                           std::to_string(m.cols()) + " choices");
  }
  double mx = m.at(0, 0);
  for (int j = 1; j < m.cols(); ++j) mx = std::max(mx, m.at(0, j));
  double denom = 0.0;
  for (int j = 0; j < m.cols(); ++j) denom += std::exp(m.at(0, j) - mx);
  const double loss = mx + std::log(denom) - m.at(0, target);
  return push(Matrix::scalar(loss), needs_grad(logits), [logits, target, v_idx = nodes_.size()](Tape& t) {
    const double g = t.nodes_[v_idx].grad.at(0, 0);
    const Matrix& m = t.value(logits);
    double mx = m.at(0, 0);
    for (int j = 1; j < m.cols(); ++j) mx = std::max(mx, m.at(0, j));
    double denom = 0.0;
    for (int j = 0; j < m.cols(); ++j) denom += std::exp(m.at(0, j) - mx);
    Matrix gl(1, m.cols());
    for (int j = 0; j < m.cols(); ++j) {
      const double p = std::exp(m.at(0, j) - mx) / denom;
      gl.at(0, j) = g * (p - (j == target ? 1.0 : 0.0));
    }
    t.accumulate(logits, gl);
  });
}

void Tape::backward(Value root) {
  const int r = check(root);
  Node& rn = nodes_[r];
  if (rn.value.rows() != 1 || rn.value.cols() != 1) {
    throw ShapeMismatch("backward: root must be 1x1, got " + rn.value.shape_str());
  }
  if (!rn.requires_grad) return;
  rn.grad.at(0, 0) += 1.0;
  for (int i = r; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backprop) n.backprop(*this);
    if (n.bound != nullptr) n.bound->grad += n.grad;
  }
}

}  // namespace mpqa
