#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqa/metapath.hpp"
#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"
#include "mpqa/vocab.hpp"

namespace mpqa {

struct UnknownHopCount : std::invalid_argument {
  explicit UnknownHopCount(const std::string& what) : std::invalid_argument(what) {}
};

/// One two-layer MLP per hop count; a k-hop raw feature is routed to its own
/// network and mapped to a d_model token embedding.
class PathEncoder {
 public:
  PathEncoder(ParameterStore& params, std::string prefix, int max_hops, int num_relations,
              int d_node, int d_model, std::mt19937_64& rng);

  /// Stacks the encoded tokens as an (n x d_model) value, preserving input
  /// order. Features are grouped per hop count so each network runs once.
  /// n = 0 yields a 0 x d_model value.
  Value encode(Tape& tape, const std::vector<RawPathFeature>& features) const;

  int max_hops() const { return max_hops_; }
  int d_model() const { return d_model_; }
  int input_dim(int hops) const;

 private:
  ParameterStore* params_;
  std::string prefix_;
  int max_hops_;
  int num_relations_;
  int d_node_;
  int d_model_;
};

/// Stand-in for a pretrained language model: a trainable embedding lookup
/// over [cls] + question + [sep] + answer. Downstream attention layers do the
/// contextualizing.
class ContextEncoder {
 public:
  struct Encoded {
    Value states;                    // (2 + |q| + |a|) x d_model
    std::vector<std::string> words;  // source word per position ([cls]/[sep] markers included)
    std::vector<bool> is_content;    // false at the cls/sep positions
  };

  ContextEncoder(ParameterStore& params, std::string prefix, const Vocabulary& vocab, int d_model,
                 std::mt19937_64& rng);

  Encoded encode(Tape& tape, const std::vector<std::string>& question,
                 const std::vector<std::string>& answer) const;

  int d_model() const { return d_model_; }

 private:
  ParameterStore* params_;
  std::string prefix_;
  const Vocabulary* vocab_;
  int d_model_;
};

}  // namespace mpqa
