#pragma once

#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpqa/matrix.hpp"
#include "mpqa/rng.hpp"

namespace mpqa {

struct DuplicateParameter : std::invalid_argument {
  explicit DuplicateParameter(const std::string& name) : std::invalid_argument("duplicate parameter: " + name) {}
};
struct UnknownParameter : std::invalid_argument {
  explicit UnknownParameter(const std::string& name) : std::invalid_argument("unknown parameter: " + name) {}
};

/// A named trainable array. Gradients accumulate across tapes until zero_grad.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Registry of trainable parameters. Creation order is the canonical order
/// used by checkpoints and the gradient checker.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, Matrix init);

  /// Weight matrix initialized uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Parameter& create_uniform(const std::string& name, int rows, int cols, int fan_in, std::mt19937_64& rng);
  Parameter& create_zeros(const std::string& name, int rows, int cols);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  size_t count() const { return order_.size(); }
  size_t scalar_count() const;

  void zero_grad();
  void scale_grads(double s);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::unique_ptr<Parameter>> index_;
};

}  // namespace mpqa
