#pragma once

#include <random>
#include <string>

#include "mpqa/graph.hpp"
#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"

namespace mpqa {

/// Relation Network style graph summary: a pairwise MLP g over every stored
/// edge running from a question anchor to an answer anchor, mean-pooled into
/// a single token. Input layout per edge matches the 1-hop path feature:
/// [phi(head), relation one-hot, phi(tail), f_tail - f_head].
class RnEncoder {
 public:
  RnEncoder(ParameterStore& params, std::string prefix, int num_relations, int d_node, int d_model,
            std::mt19937_64& rng);

  /// 1 x d_model summary; the zero row when no edge qualifies.
  Value encode(Tape& tape, const Subgraph& g) const;

  int d_model() const { return d_model_; }
  int input_dim() const;

 private:
  ParameterStore* params_;
  std::string prefix_;
  int num_relations_;
  int d_node_;
  int d_model_;
};

/// Node-centric alternative to path tokens: one token per node, an affine map
/// of [node feature, phi(node)].
class NodeTokenEncoder {
 public:
  NodeTokenEncoder(ParameterStore& params, std::string prefix, int d_node, int d_model,
                   std::mt19937_64& rng);

  /// (node count) x d_model, rows in node-list order.
  Value encode(Tape& tape, const Subgraph& g) const;

  int d_model() const { return d_model_; }

 private:
  ParameterStore* params_;
  std::string prefix_;
  int d_node_;
  int d_model_;
};

}  // namespace mpqa
