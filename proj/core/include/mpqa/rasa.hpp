#pragma once

#include <random>
#include <string>
#include <vector>

#include "mpqa/matcher.hpp"
#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"

namespace mpqa {

/// Post-softmax attention matrices collected during a forward pass, one per
/// (layer, head), for inspection/export.
struct AttentionTrace {
  struct Map {
    int layer = 0;
    int head = 0;
    Matrix weights;  // n x n, rows sum to 1
  };
  std::vector<Map> maps;
};

/// Multi-layer relation-aware self-attention encoder over the fused sequence
/// X = [context block; graph block].
///
/// Each layer runs pre-norm residual composition:
///   mid = attention(LN(x)) + x
///   out = FFN(LN(mid)) + mid
/// where attention adds the trainable modality rows (one for each block) to
/// the query/key inputs only, biases each head's logits with its own
/// omega1/omega2 scalars at the mask cells, and concatenates heads through an
/// output projection. The FFN expands 4x with a GELU between.
class RasaStack {
 public:
  RasaStack(ParameterStore& params, std::string prefix, int d_model, int layers, int heads,
            std::mt19937_64& rng);

  /// x is (n x d_model) with the first n_lm rows forming the context block;
  /// mask must be built for exactly n tokens. layers == 0 is the identity.
  Value forward(Tape& tape, Value x, int n_lm, const RpbMask& mask,
                AttentionTrace* trace = nullptr) const;
  Value layer_forward(Tape& tape, Value x, int n_lm, const RpbMask& mask, int layer,
                      AttentionTrace* trace = nullptr) const;

  int d_model() const { return d_model_; }
  int layers() const { return layers_; }
  int heads() const { return heads_; }
  int d_head() const { return d_model_ / heads_; }

  std::string omega_name(int layer, int head, int which) const;  // which in {1, 2}
  /// Every omega scalar name, layer-major then head then omega1/omega2.
  std::vector<std::string> omega_param_names() const;

 private:
  ParameterStore* params_;
  std::string prefix_;
  int d_model_;
  int layers_;
  int heads_;
};

}  // namespace mpqa
