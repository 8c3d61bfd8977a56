#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpqa/matrix.hpp"
#include "mpqa/params.hpp"

namespace mpqa {

struct TargetOutOfRange : std::out_of_range {
  explicit TargetOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

/// Handle to a node on a Tape. Only valid for the tape that produced it.
struct Value {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

/// Reverse-mode differentiation tape over dense float64 matrices.
///
/// Operations record a closure that scatters the output gradient into the
/// inputs. backward() seeds a 1x1 root with 1 and replays closures in reverse
/// creation order (a reverse topological order for define-by-run graphs), so
/// every op is visited exactly once and gradients of shared subexpressions
/// accumulate by summation. Parameter leaves additionally add their gradient
/// into the owning ParameterStore slot, which is how gradients survive the
/// tape and accumulate across examples in a batch.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // ---- leaves ----
  Value constant(Matrix m);
  Value leaf(Matrix m, bool requires_grad);
  /// Leaf bound to a parameter; one node per (tape, parameter), cached.
  Value param(Parameter& p);

  // ---- linear algebra ----
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value scale(Value a, double s);
  Value transpose(Value a);
  Value concat_rows(std::span<const Value> parts);
  Value concat_cols(std::span<const Value> parts);
  Value slice_rows(Value a, int begin, int end);
  /// out.row(i) = a.row(indices[i]); repeated indices allowed (gradients sum).
  Value gather_rows(Value a, std::vector<int> indices);
  /// Adds a 1xC row vector to every row of a.
  Value add_row_broadcast(Value a, Value row);
  /// Adds a 1xC row vector to rows [begin, end) of a, other rows unchanged.
  Value add_rows_block(Value a, Value row, int begin, int end);
  Value mean_rows(Value a);
  Value sum(Value a);
  /// pattern * s where s is a 1x1 value and pattern is a constant matrix.
  Value masked_scalar(Value s, Matrix pattern);

  // ---- nonlinearities ----
  /// Row-wise stable softmax; -inf entries get weight 0 (all -inf row -> zeros).
  Value softmax_rows(Value a);
  /// Last-dim layer norm with affine gain/bias (1 x cols each).
  Value layer_norm(Value x, Value gain, Value bias, double eps);
  Value gelu(Value a);
  Value tanh_act(Value a);
  /// log(1 + |x|) elementwise; derivative sign(x)/(1+|x|) with sign(0) = 0.
  Value log1p_abs(Value a);
  /// -log softmax(logits)[target] for 1xC logits.
  Value cross_entropy(Value logits, int target);

  // ---- execution ----
  void backward(Value root);

  const Matrix& value(Value v) const { return nodes_[check(v)].value; }
  const Matrix& grad(Value v) const { return nodes_[check(v)].grad; }
  int rows(Value v) const { return value(v).rows(); }
  int cols(Value v) const { return value(v).cols(); }
  double scalar(Value v) const;
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;  // empty for leaves/constants
    Parameter* bound = nullptr;           // parameter leaves only
  };

  int check(Value v) const;
  Value push(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop);
  void accumulate(Value v, const Matrix& g);
  bool needs_grad(Value v) const { return nodes_[check(v)].requires_grad; }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

}  // namespace mpqa
