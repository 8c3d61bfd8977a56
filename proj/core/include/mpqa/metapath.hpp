#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqa/graph.hpp"
#include "mpqa/rng.hpp"

namespace mpqa {

struct NodeMissing : std::invalid_argument {
  explicit NodeMissing(const std::string& what) : std::invalid_argument(what) {}
};
struct InvalidRate : std::invalid_argument {
  explicit InvalidRate(const std::string& what) : std::invalid_argument(what) {}
};

/// A simple path through the subgraph: k+1 distinct nodes, k relation ids.
struct MetaPath {
  std::vector<int> node_ids;
  std::vector<int> relations;

  int hops() const { return static_cast<int>(relations.size()); }
  int head() const { return node_ids.front(); }
  int tail() const { return node_ids.back(); }
  bool operator==(const MetaPath&) const = default;
};

/// Canonical enumeration order: (hops, head id, relation ids, node ids).
bool path_less(const MetaPath& a, const MetaPath& b);

struct RawPathFeature {
  int hops = 0;
  std::vector<double> vector;  // [phi(h), r_1, phi(v_1), ..., r_k, phi(t), f_t - f_h]
};

/// (k+1) type one-hots + k relation one-hots over 2|R|+1 ids + the endpoint
/// feature difference.
int path_feature_dim(int hops, int num_relations, int d_node);

/// All meta-path tokens up to max_hops, sorted canonically, duplicates
/// removed. 1-hop tokens are every stored non-self-loop edge (inverse and
/// context edges included). k>=2 tokens are simple paths over the stored
/// directed edges with one question anchor and one answer anchor as
/// endpoints (either direction); the context hub never appears in them.
/// The subgraph is assumed valid.
std::vector<MetaPath> enumerate_paths(const Subgraph& g, int max_hops);

RawPathFeature featurize(const MetaPath& path, const Subgraph& g);

/// Training-time token sampling: each element kept independently with
/// probability 1-rate, order preserved, no rescaling. Draws one uniform per
/// token in order. Eval mode (training=false) and rate 0 are identities that
/// leave the generator untouched.
template <typename T>
std::vector<T> drop_mp(const std::vector<T>& tokens, double rate, std::mt19937_64& rng,
                       bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw InvalidRate("drop rate " + std::to_string(rate) + " outside [0, 1)");
  }
  if (!training || rate == 0.0) return tokens;
  std::vector<T> kept;
  kept.reserve(tokens.size());
  for (const T& tok : tokens) {
    if (uniform01(rng) >= rate) kept.push_back(tok);
  }
  return kept;
}

}  // namespace mpqa
