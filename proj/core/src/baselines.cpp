#include "mpqa/baselines.hpp"

#include <algorithm>
#include <utility>

#include "mpqa/metapath.hpp"

namespace mpqa {

RnEncoder::RnEncoder(ParameterStore& params, std::string prefix, int num_relations, int d_node,
                     int d_model, std::mt19937_64& rng)
    : params_(&params),
      prefix_(std::move(prefix)),
      num_relations_(num_relations),
      d_node_(d_node),
      d_model_(d_model) {
  const int in = input_dim();
  params_->create_uniform(prefix_ + ".w1", in, d_model_, in, rng);
  params_->create_zeros(prefix_ + ".b1", 1, d_model_);
  params_->create_uniform(prefix_ + ".w2", d_model_, d_model_, d_model_, rng);
  params_->create_zeros(prefix_ + ".b2", 1, d_model_);
}

int RnEncoder::input_dim() const { return path_feature_dim(1, num_relations_, d_node_); }

Value RnEncoder::encode(Tape& tape, const Subgraph& g) const {
  const auto is_anchor = [](const std::vector<int>& ids, int id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };

  std::vector<double> flat;
  int count = 0;
  for (const Edge& e : g.edges) {
    if (!is_anchor(g.q_nodes, e.head) || !is_anchor(g.a_nodes, e.tail)) continue;
    MetaPath hop{{e.head, e.tail}, {e.relation}};
    RawPathFeature feat = featurize(hop, g);
    flat.insert(flat.end(), feat.vector.begin(), feat.vector.end());
    ++count;
  }
  if (count == 0) return tape.constant(Matrix(1, d_model_));

  Matrix inputs(count, input_dim());
  std::copy(flat.begin(), flat.end(), inputs.data());

  Value x = tape.constant(inputs);
  Value w1 = tape.param(params_->get(prefix_ + ".w1"));
  Value b1 = tape.param(params_->get(prefix_ + ".b1"));
  Value w2 = tape.param(params_->get(prefix_ + ".w2"));
  Value b2 = tape.param(params_->get(prefix_ + ".b2"));
  Value hidden = tape.gelu(tape.add_row_broadcast(tape.matmul(x, w1), b1));
  Value per_edge = tape.add_row_broadcast(tape.matmul(hidden, w2), b2);
  return tape.mean_rows(per_edge);
}

NodeTokenEncoder::NodeTokenEncoder(ParameterStore& params, std::string prefix, int d_node,
                                   int d_model, std::mt19937_64& rng)
    : params_(&params), prefix_(std::move(prefix)), d_node_(d_node), d_model_(d_model) {
  const int in = d_node_ + kNodeTypeCount;
  params_->create_uniform(prefix_ + ".w", in, d_model_, in, rng);
  params_->create_zeros(prefix_ + ".b", 1, d_model_);
}

Value NodeTokenEncoder::encode(Tape& tape, const Subgraph& g) const {
  if (g.nodes.empty()) return tape.constant(Matrix(0, d_model_));

  const int in = d_node_ + kNodeTypeCount;
  Matrix inputs(static_cast<int>(g.nodes.size()), in);
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
    const Node& node = g.nodes[i];
    if (static_cast<int>(node.feature.size()) != d_node_) {
      throw ShapeMismatch("node " + std::to_string(node.id) + " feature has dim " +
                          std::to_string(node.feature.size()) + ", encoder expects " +
                          std::to_string(d_node_));
    }
    for (int j = 0; j < d_node_; ++j) inputs.at(i, j) = node.feature[j];
    const auto phi = one_hot(node.type);
    for (int j = 0; j < kNodeTypeCount; ++j) inputs.at(i, d_node_ + j) = phi[j];
  }

  Value x = tape.constant(inputs);
  Value w = tape.param(params_->get(prefix_ + ".w"));
  Value b = tape.param(params_->get(prefix_ + ".b"));
  return tape.add_row_broadcast(tape.matmul(x, w), b);
}

}  // namespace mpqa
