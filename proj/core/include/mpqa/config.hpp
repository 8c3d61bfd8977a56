#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mpqa/model.hpp"
#include "mpqa/training.hpp"

namespace mpqa {

/// A config field failed to parse or validate; the message names the field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Every run hyperparameter, as read from a flat key=value file with CLI
/// overrides layered on top.
struct RunConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 2;
  int max_hops = 2;
  double lambda = 10.0;
  SigmaKind sigma = SigmaKind::tanh_fn;
  double drop_mp = 0.0;
  double lr = 1e-3;
  int warmup_steps = 0;
  bool rectified = false;
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  KgEncoderKind kg_encoder = KgEncoderKind::metapath;
  bool rpb = true;
  RpbOrientation orientation = RpbOrientation::literal;
  int token_cap = 400;
};

/// Applies one key=value assignment; ConfigError on unknown keys or values
/// that do not parse as the field's type.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

/// Lines of `key = value`; blank lines and #-comments ignored.
RunConfig parse_config_file(const std::string& path);

/// Range checks across fields; ConfigError names the offender.
void validate_config(const RunConfig& cfg);

ModelConfig to_model_config(const RunConfig& cfg, int num_relations, int d_node);
TrainConfig to_train_config(const RunConfig& cfg);

}  // namespace mpqa
