#include "mpqa/config.hpp"

#include <fstream>

namespace mpqa {

namespace {

std::string trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': '" + value + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size() || (!value.empty() && value[0] == '-'))
      throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': '" + value + "' is not a nonnegative integer");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': '" + value + "' is not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("field '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "d_model") cfg.d_model = parse_int(key, value);
  else if (key == "layers") cfg.layers = parse_int(key, value);
  else if (key == "heads") cfg.heads = parse_int(key, value);
  else if (key == "max_hops") cfg.max_hops = parse_int(key, value);
  else if (key == "lambda") cfg.lambda = parse_double(key, value);
  else if (key == "sigma") {
    try {
      cfg.sigma = sigma_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("field 'sigma': " + std::string(e.what()));
    }
  } else if (key == "drop_mp") cfg.drop_mp = parse_double(key, value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "warmup_steps") cfg.warmup_steps = parse_int(key, value);
  else if (key == "rectified") cfg.rectified = parse_bool(key, value);
  else if (key == "epochs") cfg.epochs = parse_int(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "kg_encoder") {
    try {
      cfg.kg_encoder = kg_encoder_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("field 'kg_encoder': " + std::string(e.what()));
    }
  } else if (key == "rpb") cfg.rpb = parse_bool(key, value);
  else if (key == "orientation") {
    if (value == "literal") cfg.orientation = RpbOrientation::literal;
    else if (value == "figure") cfg.orientation = RpbOrientation::figure;
    else throw ConfigError("field 'orientation': expected literal or figure, got '" + value + "'");
  } else if (key == "token_cap") cfg.token_cap = parse_int(key, value);
  else throw ConfigError("unknown config field '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");

  RunConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.d_model < 1) fail("field 'd_model' must be positive");
  if (cfg.layers < 0) fail("field 'layers' must be nonnegative");
  if (cfg.heads < 1) fail("field 'heads' must be positive");
  if (cfg.d_model % cfg.heads != 0) fail("field 'heads' must divide d_model");
  if (cfg.max_hops < 1) fail("field 'max_hops' must be at least 1");
  if (cfg.lambda < 0.0) fail("field 'lambda' must be nonnegative");
  if (cfg.drop_mp < 0.0 || cfg.drop_mp >= 1.0) fail("field 'drop_mp' must lie in [0, 1)");
  if (cfg.lr <= 0.0) fail("field 'lr' must be positive");
  if (cfg.warmup_steps < 0) fail("field 'warmup_steps' must be nonnegative");
  if (cfg.epochs < 0) fail("field 'epochs' must be nonnegative");
  if (cfg.batch_size < 1) fail("field 'batch_size' must be positive");
  if (cfg.token_cap < 0) fail("field 'token_cap' must be nonnegative");
}

ModelConfig to_model_config(const RunConfig& cfg, int num_relations, int d_node) {
  ModelConfig out;
  out.d_model = cfg.d_model;
  out.layers = cfg.layers;
  out.heads = cfg.heads;
  out.max_hops = cfg.max_hops;
  out.kg_encoder = cfg.kg_encoder;
  out.rpb = cfg.rpb;
  out.orientation = cfg.orientation;
  out.token_cap = cfg.token_cap;
  out.num_relations = num_relations;
  out.d_node = d_node;
  return out;
}

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig out;
  out.epochs = cfg.epochs;
  out.batch_size = cfg.batch_size;
  out.seed = cfg.seed;
  out.drop_mp_rate = cfg.drop_mp;
  out.adam.lr = cfg.lr;
  out.adam.warmup_steps = cfg.warmup_steps;
  out.adam.rectified = cfg.rectified;
  out.loss.lambda = cfg.lambda;
  out.loss.sigma = cfg.sigma;
  return out;
}

}  // namespace mpqa
