#include "mpqa/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "mpqa/checkpoint.hpp"
#include "mpqa/rng.hpp"

namespace mpqa {

SigmaKind sigma_from_string(const std::string& name) {
  if (name == "tanh") return SigmaKind::tanh_fn;
  if (name == "log1p-abs") return SigmaKind::log1p_abs_fn;
  throw std::invalid_argument("unknown sigma '" + name + "' (expected tanh or log1p-abs)");
}

std::string to_string(SigmaKind kind) {
  return kind == SigmaKind::tanh_fn ? "tanh" : "log1p-abs";
}

LossParts mcqa_loss(Tape& tape, ParameterStore& params, Value logits, int target,
                    const std::vector<std::string>& omega_names, const LossConfig& cfg) {
  if (cfg.lambda < 0.0)
    throw std::invalid_argument("lambda must be nonnegative, got " + std::to_string(cfg.lambda));

  Value ce = tape.cross_entropy(logits, target);
  if (cfg.lambda == 0.0 || omega_names.empty()) return {ce, ce, 0.0};

  Value reward;
  for (size_t i = 0; i < omega_names.size(); ++i) {
    Value omega = tape.param(params.get(omega_names[i]));
    Value s = cfg.sigma == SigmaKind::tanh_fn ? tape.tanh_act(omega) : tape.log1p_abs(omega);
    reward = (i == 0) ? s : tape.add(reward, s);
  }
  Value total = tape.sub(ce, tape.scale(reward, cfg.lambda));
  return {total, ce, cfg.lambda * tape.scalar(reward)};
}

AdamOptimizer::AdamOptimizer(ParameterStore& store, AdamConfig cfg) : store_(&store), cfg_(cfg) {
  for (const std::string& name : store.names()) {
    const Matrix& value = store.get(name).value;
    m_.emplace(name, Matrix(value.rows(), value.cols()));
    v_.emplace(name, Matrix(value.rows(), value.cols()));
  }
}

const Matrix& AdamOptimizer::moment_m(const std::string& name) const { return m_.at(name); }
const Matrix& AdamOptimizer::moment_v(const std::string& name) const { return v_.at(name); }
Matrix& AdamOptimizer::moment_m(const std::string& name) { return m_.at(name); }
Matrix& AdamOptimizer::moment_v(const std::string& name) { return v_.at(name); }

void AdamOptimizer::step(const std::function<bool(const std::string&)>& update_filter) {
  ++t_;
  double lr = cfg_.lr;
  if (cfg_.warmup_steps > 0 && t_ < cfg_.warmup_steps)
    lr *= static_cast<double>(t_) / cfg_.warmup_steps;

  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  // Rectification bookkeeping: how much variance evidence t steps carry.
  const double rho_inf = 2.0 / (1.0 - cfg_.beta2) - 1.0;
  const double rho_t = rho_inf - 2.0 * t_ * std::pow(cfg_.beta2, t_) / bc2;
  double rect = 1.0;
  bool use_variance = true;
  if (cfg_.rectified) {
    if (rho_t > 4.0) {
      rect = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                       ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
    } else {
      use_variance = false;  // too few steps: plain momentum update
    }
  }

  for (const std::string& name : store_->names()) {
    if (update_filter && !update_filter(name)) continue;
    Parameter& p = store_->get(name);
    double* m = m_.at(name).data();
    double* v = v_.at(name).data();
    const double* g = p.grad.data();
    double* theta = p.value.data();
    const size_t count = p.grad.values().size();
    for (size_t i = 0; i < count; ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      if (use_variance) {
        const double v_hat = std::sqrt(v[i] / bc2);
        theta[i] -= lr * rect * m_hat / (v_hat + cfg_.eps);
      } else {
        theta[i] -= lr * m_hat;
      }
    }
  }
}

Trainer::Trainer(Model& model, ParameterStore& params, TrainConfig cfg)
    : model_(&model), params_(&params), cfg_(cfg), opt_(params, cfg.adam), rng_(cfg.seed) {
  if (cfg_.epochs < 0)
    throw std::invalid_argument("epochs must be nonnegative, got " + std::to_string(cfg_.epochs));
  if (cfg_.batch_size < 1)
    throw std::invalid_argument("batch_size must be positive, got " +
                                std::to_string(cfg_.batch_size));
}

void Trainer::set_update_filter(std::function<bool(const std::string&)> filter) {
  filter_ = std::move(filter);
}

StepMetrics Trainer::train_step(const std::vector<const McqaExample*>& batch) {
  if (batch.empty()) throw EmptyDataset("train_step got an empty batch");
  params_->zero_grad();
  const std::vector<std::string> omega_names = model_->omega_param_names();

  double sum_loss = 0.0;
  double sum_ce = 0.0;
  double sum_reg = 0.0;
  int correct = 0;
  for (const McqaExample* ex : batch) {
    Tape tape;
    Model::ScoreOptions opts;
    opts.training = true;
    opts.drop_mp_rate = cfg_.drop_mp_rate;
    opts.drop_rng = &rng_;

    std::vector<Value> scores;
    scores.reserve(ex->choices.size());
    for (const McqaChoice& choice : ex->choices)
      scores.push_back(model_->score_choice(tape, ex->question, choice.text, choice.graph, opts));
    Value logits = tape.concat_cols(scores);
    LossParts parts = mcqa_loss(tape, *params_, logits, ex->answer, omega_names, cfg_.loss);

    const double loss = tape.scalar(parts.total);
    if (!std::isfinite(loss))
      throw NonFiniteLoss("non-finite loss " + std::to_string(loss) + " at optimizer step " +
                          std::to_string(opt_.step_count() + 1));
    tape.backward(parts.total);

    sum_loss += loss;
    sum_ce += tape.scalar(parts.ce);
    sum_reg += parts.reg;
    const Matrix& row = tape.value(logits);
    int best = 0;
    for (int c = 1; c < row.cols(); ++c)
      if (row.at(0, c) > row.at(0, best)) best = c;
    if (best == ex->answer) ++correct;
  }

  params_->scale_grads(1.0 / static_cast<double>(batch.size()));
  opt_.step(filter_);

  const double n = static_cast<double>(batch.size());
  return {opt_.step_count(), sum_loss / n, sum_ce / n, sum_reg / n, correct / n};
}

void Trainer::run(const std::vector<McqaExample>& data, std::ostream* metrics) {
  if (data.empty()) throw EmptyDataset("cannot train on an empty dataset");
  if (metrics) *metrics << metrics_header() << '\n';

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle_in_place(order, rng_);
    for (size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      std::vector<const McqaExample*> batch;
      const size_t end = std::min(order.size(), start + cfg_.batch_size);
      for (size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      const StepMetrics m = train_step(batch);
      if (metrics) *metrics << format_metrics(m) << '\n';
    }
  }
}

std::string Trainer::metrics_header() { return "step\tloss\tce\treg\taccuracy"; }

std::string Trainer::format_metrics(const StepMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\t%.17g\t%.17g", m.step, m.loss, m.ce, m.reg,
                m.accuracy);
  return buf;
}

EvalResult evaluate(const Model& model, const std::vector<McqaExample>& data) {
  if (data.empty()) throw EmptyDataset("cannot evaluate an empty dataset");
  EvalResult result;
  int correct = 0;
  for (const McqaExample& ex : data) {
    Tape tape;
    int best = 0;
    double best_score = 0.0;
    for (size_t c = 0; c < ex.choices.size(); ++c) {
      const double s = tape.scalar(
          model.score_choice(tape, ex.question, ex.choices[c].text, ex.choices[c].graph));
      if (c == 0 || s > best_score) {
        best = static_cast<int>(c);
        best_score = s;
      }
    }
    result.predictions.push_back(best);
    if (best == ex.answer) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

namespace {

constexpr const char* kMetaKeys[] = {
    "__meta__.d_model",   "__meta__.layers",  "__meta__.heads",
    "__meta__.max_hops",  "__meta__.kg_encoder", "__meta__.rpb",
    "__meta__.orientation", "__meta__.token_cap", "__meta__.num_relations",
    "__meta__.d_node",    "__meta__.vocab_size"};

CheckpointEntries meta_entries(const RunMeta& meta) {
  const ModelConfig& m = meta.model;
  const double fields[] = {static_cast<double>(m.d_model),
                           static_cast<double>(m.layers),
                           static_cast<double>(m.heads),
                           static_cast<double>(m.max_hops),
                           static_cast<double>(static_cast<int>(m.kg_encoder)),
                           m.rpb ? 1.0 : 0.0,
                           static_cast<double>(static_cast<int>(m.orientation)),
                           static_cast<double>(m.token_cap),
                           static_cast<double>(m.num_relations),
                           static_cast<double>(m.d_node),
                           static_cast<double>(meta.vocab_size)};
  CheckpointEntries out;
  for (size_t i = 0; i < std::size(kMetaKeys); ++i)
    out.emplace_back(kMetaKeys[i], Matrix::scalar(fields[i]));
  return out;
}

RunMeta decode_meta(const std::map<std::string, const Matrix*>& by_name,
                    const std::string& path) {
  double fields[std::size(kMetaKeys)];
  for (size_t i = 0; i < std::size(kMetaKeys); ++i) {
    auto it = by_name.find(kMetaKeys[i]);
    if (it == by_name.end() || it->second->rows() != 1 || it->second->cols() != 1)
      throw CheckpointError("'" + path + "' lacks metadata entry " + kMetaKeys[i]);
    fields[i] = it->second->at(0, 0);
  }
  RunMeta meta;
  meta.model.d_model = static_cast<int>(fields[0]);
  meta.model.layers = static_cast<int>(fields[1]);
  meta.model.heads = static_cast<int>(fields[2]);
  meta.model.max_hops = static_cast<int>(fields[3]);
  meta.model.kg_encoder = static_cast<KgEncoderKind>(static_cast<int>(fields[4]));
  meta.model.rpb = fields[5] != 0.0;
  meta.model.orientation = static_cast<RpbOrientation>(static_cast<int>(fields[6]));
  meta.model.token_cap = static_cast<int>(fields[7]);
  meta.model.num_relations = static_cast<int>(fields[8]);
  meta.model.d_node = static_cast<int>(fields[9]);
  meta.vocab_size = static_cast<int>(fields[10]);
  return meta;
}

Matrix encode_rng(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  const std::string s = os.str();
  Matrix out(1, static_cast<int>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) out.at(0, static_cast<int>(i)) = s[i];
  return out;
}

void decode_rng(const Matrix& m, std::mt19937_64& rng) {
  std::string s;
  for (int i = 0; i < m.cols(); ++i) s += static_cast<char>(m.at(0, i));
  std::istringstream is(s);
  is >> rng;
  if (!is) throw CheckpointError("corrupt rng state in checkpoint");
}

}  // namespace

void save_train_state(const std::string& path, const ParameterStore& params,
                      const AdamOptimizer& opt, const std::mt19937_64& rng, const RunMeta& meta) {
  CheckpointEntries entries = meta_entries(meta);
  for (const std::string& name : params.names()) entries.emplace_back(name, params.get(name).value);
  entries.emplace_back("adam.t", Matrix::scalar(opt.step_count()));
  for (const std::string& name : params.names()) {
    entries.emplace_back("adam.m." + name, opt.moment_m(name));
    entries.emplace_back("adam.v." + name, opt.moment_v(name));
  }
  entries.emplace_back("rng.state", encode_rng(rng));
  save_checkpoint(path, entries);
}

RunMeta load_train_state(const std::string& path, ParameterStore& params, AdamOptimizer& opt,
                         std::mt19937_64& rng) {
  const CheckpointEntries entries = load_checkpoint(path);
  std::map<std::string, const Matrix*> by_name;
  for (const auto& [name, value] : entries) {
    if (!by_name.emplace(name, &value).second)
      throw CheckpointError("'" + path + "' repeats entry " + name);
  }
  const RunMeta meta = decode_meta(by_name, path);

  std::set<std::string> consumed(std::begin(kMetaKeys), std::end(kMetaKeys));
  const auto take = [&](const std::string& name) -> const Matrix& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CheckpointError("'" + path + "' lacks entry " + name);
    consumed.insert(name);
    return *it->second;
  };
  const auto fit = [&](const std::string& name, Matrix& dst) {
    const Matrix& src = take(name);
    if (!dst.same_shape(src))
      throw CheckpointError("entry " + name + " is " + src.shape_str() + ", expected " +
                            dst.shape_str());
    dst = src;
  };

  for (const std::string& name : params.names()) {
    fit(name, params.get(name).value);
    fit("adam.m." + name, opt.moment_m(name));
    fit("adam.v." + name, opt.moment_v(name));
  }
  opt.set_step_count(static_cast<int>(take("adam.t").at(0, 0)));
  decode_rng(take("rng.state"), rng);

  for (const auto& [name, value] : by_name)
    if (!consumed.count(name)) throw CheckpointError("'" + path + "' has stray entry " + name);
  return meta;
}

RunMeta peek_meta(const std::string& path) {
  const CheckpointEntries entries = load_checkpoint(path);
  std::map<std::string, const Matrix*> by_name;
  for (const auto& [name, value] : entries) by_name.emplace(name, &value);
  return decode_meta(by_name, path);
}

}  // namespace mpqa
