#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqa/data_io.hpp"
#include "mpqa/model.hpp"
#include "mpqa/params.hpp"
#include "mpqa/tape.hpp"

namespace mpqa {

struct NonFiniteLoss : std::runtime_error {
  explicit NonFiniteLoss(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyDataset : std::runtime_error {
  explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};

enum class SigmaKind { tanh_fn, log1p_abs_fn };

SigmaKind sigma_from_string(const std::string& name);
std::string to_string(SigmaKind kind);

struct LossConfig {
  double lambda = 10.0;        // weight of the bias-cell reward
  SigmaKind sigma = SigmaKind::tanh_fn;
};

struct LossParts {
  Value total;  // what backward runs on
  Value ce;
  double reg;   // lambda * sum of sigma(omega), as logged; 0 when lambda == 0
};

/// Cross-entropy over the choice logits minus lambda * sum sigma(omega) over
/// every listed omega scalar. With lambda == 0 (or no omegas) `total` IS the
/// cross-entropy node, not a copy.
LossParts mcqa_loss(Tape& tape, ParameterStore& params, Value logits, int target,
                    const std::vector<std::string>& omega_names, const LossConfig& cfg);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int warmup_steps = 0;   // linear ramp: lr * min(1, t / warmup)
  bool rectified = false; // variance rectification (RAdam-style)
};

/// Adaptive-moment optimizer over every parameter in a store. Moments are
/// allocated at construction, so all parameters must exist by then.
class AdamOptimizer {
 public:
  AdamOptimizer(ParameterStore& store, AdamConfig cfg);

  /// Applies the accumulated gradients. `update_filter`, when set, limits the
  /// update (and moment tracking) to parameters whose name passes.
  void step(const std::function<bool(const std::string&)>& update_filter = nullptr);

  int step_count() const { return t_; }
  void set_step_count(int t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }

  const Matrix& moment_m(const std::string& name) const;
  const Matrix& moment_v(const std::string& name) const;
  Matrix& moment_m(const std::string& name);
  Matrix& moment_v(const std::string& name);

 private:
  ParameterStore* store_;
  AdamConfig cfg_;
  int t_ = 0;
  std::map<std::string, Matrix> m_;
  std::map<std::string, Matrix> v_;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  double drop_mp_rate = 0.0;
  AdamConfig adam;
  LossConfig loss;
};

struct StepMetrics {
  int step = 0;
  double loss = 0.0;
  double ce = 0.0;
  double reg = 0.0;
  double accuracy = 0.0;  // batch train accuracy
};

/// Epoch/batch loop: per-example forward over all choices, mean gradients
/// across the batch, one optimizer step per batch.
class Trainer {
 public:
  Trainer(Model& model, ParameterStore& params, TrainConfig cfg);

  StepMetrics train_step(const std::vector<const McqaExample*>& batch);
  /// Shuffles per epoch and writes one metrics line per step when `metrics`
  /// is given (header written first).
  void run(const std::vector<McqaExample>& data, std::ostream* metrics = nullptr);

  static std::string metrics_header();
  static std::string format_metrics(const StepMetrics& m);

  AdamOptimizer& optimizer() { return opt_; }
  std::mt19937_64& rng() { return rng_; }
  const TrainConfig& config() const { return cfg_; }
  /// Restrict optimizer updates (e.g. to the omega scalars only).
  void set_update_filter(std::function<bool(const std::string&)> filter);

 private:
  Model* model_;
  ParameterStore* params_;
  TrainConfig cfg_;
  AdamOptimizer opt_;
  std::mt19937_64 rng_;
  std::function<bool(const std::string&)> filter_;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<int> predictions;  // argmax choice per example, ties -> lowest index
};

EvalResult evaluate(const Model& model, const std::vector<McqaExample>& data);

/// Everything needed to rebuild a model around a checkpoint.
struct RunMeta {
  ModelConfig model;
  int vocab_size = 0;
};

/// Single-file training snapshot: run metadata, parameters, optimizer
/// moments and step counter, and the exact RNG state. Round-trips bit-exactly.
void save_train_state(const std::string& path, const ParameterStore& params,
                      const AdamOptimizer& opt, const std::mt19937_64& rng, const RunMeta& meta);
RunMeta load_train_state(const std::string& path, ParameterStore& params, AdamOptimizer& opt,
                         std::mt19937_64& rng);
/// Reads only the metadata block (to construct the model, then load fully).
RunMeta peek_meta(const std::string& path);

}  // namespace mpqa
