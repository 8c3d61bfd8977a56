#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mpqa/baselines.hpp"
#include "mpqa/encoders.hpp"
#include "mpqa/graph.hpp"
#include "mpqa/matcher.hpp"
#include "mpqa/params.hpp"
#include "mpqa/rasa.hpp"
#include "mpqa/tape.hpp"
#include "mpqa/vocab.hpp"

namespace mpqa {

enum class KgEncoderKind { metapath, node, rn, none };

KgEncoderKind kg_encoder_from_string(const std::string& name);
std::string to_string(KgEncoderKind kind);

struct ModelConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 2;
  int max_hops = 2;  // K
  KgEncoderKind kg_encoder = KgEncoderKind::metapath;
  bool rpb = true;
  RpbOrientation orientation = RpbOrientation::literal;
  int token_cap = 400;    // graph tokens kept per choice (canonical-order prefix)
  int num_relations = 0;  // |R| of the dataset the model will see
  int d_node = 0;         // node feature width of that dataset
};

/// Scores one answer choice: embeds [cls] + question + [sep] + answer, encodes
/// the choice's subgraph into tokens (selecting one of the interchangeable
/// graph encoders), fuses both blocks through the attention stack, and reads
/// the logit off the cls position.
class Model {
 public:
  Model(ParameterStore& params, const ModelConfig& cfg, const Vocabulary& vocab,
        const WordEmbeddings* embeddings, std::mt19937_64& init_rng);

  struct ScoreOptions {
    bool training = false;
    double drop_mp_rate = 0.0;
    std::mt19937_64* drop_rng = nullptr;  // consulted only when training with rate > 0
    AttentionTrace* trace = nullptr;
    std::vector<std::string>* token_labels = nullptr;  // label per fused position
    RpbMask* mask_out = nullptr;
  };

  /// 1x1 logit. The graph may arrive with or without its context hub; one is
  /// inserted here when missing.
  Value score_choice(Tape& tape, const std::vector<std::string>& question,
                     const std::vector<std::string>& answer, const Subgraph& graph,
                     const ScoreOptions& opts) const;
  /// Eval-mode scoring (no dropping, no trace capture).
  Value score_choice(Tape& tape, const std::vector<std::string>& question,
                     const std::vector<std::string>& answer, const Subgraph& graph) const;

  const ModelConfig& config() const { return cfg_; }
  const RasaStack& stack() const { return stack_; }
  std::vector<std::string> omega_param_names() const { return stack_.omega_param_names(); }

 private:
  struct KgTokens {
    Value states;  // n_kg x d_model
    std::vector<std::pair<std::string, std::string>> surfaces;  // endpoint surfaces per token
    std::vector<std::string> labels;
  };
  KgTokens encode_kg(Tape& tape, const Subgraph& g, const ScoreOptions& opts) const;

  ParameterStore* params_;
  ModelConfig cfg_;
  const WordEmbeddings* embeddings_;
  ContextEncoder context_;
  std::optional<PathEncoder> paths_;
  std::optional<NodeTokenEncoder> node_tokens_;
  std::optional<RnEncoder> rn_;
  RasaStack stack_;
};

}  // namespace mpqa
