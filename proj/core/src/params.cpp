#include "mpqa/params.hpp"

#include <cmath>

namespace mpqa {

Parameter& ParameterStore::create(const std::string& name, Matrix init) {
  if (contains(name)) throw DuplicateParameter(name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::zeros(init.rows(), init.cols());
  p->value = std::move(init);
  Parameter& ref = *p;
  index_.emplace(name, std::move(p));
  order_.push_back(name);
  return ref;
}

Parameter& ParameterStore::create_uniform(const std::string& name, int rows, int cols, int fan_in,
                                          std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  Matrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = uniform_range(rng, -bound, bound);
  return create(name, std::move(m));
}

Parameter& ParameterStore::create_zeros(const std::string& name, int rows, int cols) {
  return create(name, Matrix::zeros(rows, cols));
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownParameter(name);
  return *it->second;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownParameter(name);
  return *it->second;
}

size_t ParameterStore::scalar_count() const {
  size_t n = 0;
  for (const auto& name : order_) n += get(name).value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (const auto& name : order_) {
    Matrix& g = get(name).grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] = 0.0;
  }
}

void ParameterStore::scale_grads(double s) {
  for (const auto& name : order_) get(name).grad *= s;
}

}  // namespace mpqa
