#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpqa/checkpoint.hpp"
#include "mpqa/config.hpp"
#include "mpqa/data_io.hpp"
#include "mpqa/model.hpp"
#include "mpqa/training.hpp"
#include "mpqa/vocab.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Config assembly shared by train and ablate: defaults, then the config file,
// then explicit flags.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    add_override(cmd, "--seed", "seed", "RNG seed");
    add_override(cmd, "--kg-encoder", "kg_encoder", "graph encoder: metapath, node, rn, none");
    add_override(cmd, "--drop-mp", "drop_mp", "training-time token drop rate");
    add_override(cmd, "--max-hops", "max_hops", "path length bound K");
    add_override(cmd, "--lambda", "lambda", "bias-cell reward weight");
    cmd.add_flag_callback(
        "--no-rpb", [this] { overrides.emplace_back("rpb", "false"); },
        "disable the learned attention-bias cells");
  }

  mpqa::RunConfig resolve() const {
    mpqa::RunConfig cfg;
    if (!config_path.empty()) cfg = mpqa::parse_config_file(config_path);
    for (const auto& [key, value] : overrides) mpqa::apply_config_entry(cfg, key, value);
    mpqa::validate_config(cfg);
    return cfg;
  }

 private:
  void add_override(CLI::App& cmd, const char* flag, std::string key, const char* help) {
    cmd.add_option_function<std::string>(
        flag,
        [this, key = std::move(key)](const std::string& value) {
          overrides.emplace_back(key, value);
        },
        help);
  }
};

struct LoadedData {
  std::vector<mpqa::McqaExample> examples;
  int num_relations = 0;
  int d_node = 0;
};

LoadedData load_examples(const std::string& path) {
  LoadedData out;
  out.examples = mpqa::load_dataset(path);
  if (out.examples.empty())
    throw mpqa::ValidationError(0, "dataset '" + path + "' contains no examples");
  out.num_relations = out.examples[0].choices[0].graph.num_relations;
  out.d_node = out.examples[0].choices[0].graph.node_feature_dim();
  for (size_t i = 0; i < out.examples.size(); ++i) {
    for (const mpqa::McqaChoice& c : out.examples[i].choices) {
      if (c.graph.num_relations != out.num_relations ||
          c.graph.node_feature_dim() != out.d_node) {
        throw mpqa::ValidationError(
            static_cast<int>(i + 1),
            "graphs must share num_relations and feature width across the dataset");
      }
    }
  }
  return out;
}

std::optional<mpqa::WordEmbeddings> maybe_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return mpqa::WordEmbeddings::load(path);
}

struct TrainOutcome {
  double train_accuracy = 0.0;
};

// One full training run; writes metrics/vocab/checkpoint only when out_dir is
// nonempty.
TrainOutcome run_training(const mpqa::RunConfig& cfg, const LoadedData& data,
                          const mpqa::WordEmbeddings* emb, const std::string& out_dir,
                          std::ostream* metrics) {
  const mpqa::Vocabulary vocab =
      mpqa::Vocabulary::from_corpus(mpqa::dataset_word_corpus(data.examples));
  mpqa::ParameterStore store;
  std::mt19937_64 init_rng(cfg.seed);
  mpqa::Model model(store, mpqa::to_model_config(cfg, data.num_relations, data.d_node), vocab,
                    emb, init_rng);
  mpqa::Trainer trainer(model, store, mpqa::to_train_config(cfg));
  trainer.run(data.examples, metrics);

  TrainOutcome outcome;
  outcome.train_accuracy = mpqa::evaluate(model, data.examples).accuracy;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    vocab.save((fs::path(out_dir) / "vocab.txt").string());
    mpqa::RunMeta meta;
    meta.model = model.config();
    meta.vocab_size = vocab.size();
    mpqa::save_train_state((fs::path(out_dir) / "checkpoint.bin").string(), store,
                           trainer.optimizer(), trainer.rng(), meta);
  }
  return outcome;
}

int cmd_gen(const std::string& task_name, int n, std::uint64_t seed, const std::string& out_dir,
            int emb_dim) {
  const mpqa::SyntheticTask task = mpqa::synthetic_task_from_string(task_name);
  fs::create_directories(out_dir);
  const fs::path data_path = fs::path(out_dir) / (task_name + ".jsonl");
  const fs::path emb_path = fs::path(out_dir) / "embeddings.txt";
  mpqa::save_dataset(data_path.string(), mpqa::gen_synthetic(task, n, seed));
  mpqa::synthetic_embeddings(emb_dim, seed).save(emb_path.string());
  std::cout << "dataset\t" << data_path.string() << "\n";
  std::cout << "embeddings\t" << emb_path.string() << "\n";
  return 0;
}

int cmd_train(const ConfigArgs& cfg_args, const std::string& data_path,
              const std::string& emb_path, const std::string& out_dir) {
  const mpqa::RunConfig cfg = cfg_args.resolve();
  const LoadedData data = load_examples(data_path);
  const auto emb = maybe_embeddings(emb_path);

  fs::create_directories(out_dir);
  std::ofstream metrics((fs::path(out_dir) / "metrics.tsv").string());
  const TrainOutcome outcome =
      run_training(cfg, data, emb ? &*emb : nullptr, out_dir, &metrics);

  std::cout << "train_accuracy\t" << fmt(outcome.train_accuracy) << "\n";
  std::cout << "checkpoint\t" << (fs::path(out_dir) / "checkpoint.bin").string() << "\n";
  return 0;
}

struct RestoredModel {
  mpqa::ParameterStore store;
  mpqa::Vocabulary vocab;
  std::optional<mpqa::WordEmbeddings> emb;
  std::optional<mpqa::Model> model;
  mpqa::RunMeta meta;
};

void restore_model(RestoredModel& rm, const std::string& ckpt_path, const std::string& vocab_path,
                   const std::string& emb_path, const LoadedData& data) {
  if (!fs::exists(ckpt_path))
    throw mpqa::CheckpointError("checkpoint '" + ckpt_path + "' does not exist");
  rm.meta = mpqa::peek_meta(ckpt_path);
  rm.vocab = mpqa::Vocabulary::load(vocab_path);
  if (rm.vocab.size() != rm.meta.vocab_size)
    throw mpqa::CheckpointError("vocabulary has " + std::to_string(rm.vocab.size()) +
                                " tokens but the checkpoint was trained with " +
                                std::to_string(rm.meta.vocab_size));
  if (data.num_relations != rm.meta.model.num_relations || data.d_node != rm.meta.model.d_node)
    throw mpqa::CheckpointError(
        "checkpoint/dataset mismatch: trained on num_relations=" +
        std::to_string(rm.meta.model.num_relations) + ", d_node=" +
        std::to_string(rm.meta.model.d_node) + " but the dataset has num_relations=" +
        std::to_string(data.num_relations) + ", d_node=" + std::to_string(data.d_node));

  rm.emb = maybe_embeddings(emb_path);
  std::mt19937_64 scratch_rng(0);
  rm.model.emplace(rm.store, rm.meta.model, rm.vocab, rm.emb ? &*rm.emb : nullptr, scratch_rng);
  mpqa::AdamOptimizer opt(rm.store, {});
  std::mt19937_64 rng_state;
  mpqa::load_train_state(ckpt_path, rm.store, opt, rng_state);
}

int cmd_eval(const std::string& ckpt, const std::string& vocab_path, const std::string& emb_path,
             const std::string& data_path, const std::string& predictions_path) {
  const LoadedData data = load_examples(data_path);
  RestoredModel rm;
  restore_model(rm, ckpt, vocab_path, emb_path, data);

  const mpqa::EvalResult result = mpqa::evaluate(*rm.model, data.examples);
  std::cout << "accuracy\t" << fmt(result.accuracy) << "\n";

  if (!predictions_path.empty()) {
    std::ofstream out(predictions_path);
    out << "example\tprediction\tanswer\n";
    for (size_t i = 0; i < result.predictions.size(); ++i)
      out << i << '\t' << result.predictions[i] << '\t' << data.examples[i].answer << '\n';
    std::cout << "predictions\t" << predictions_path << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& ckpt, const std::string& vocab_path,
                const std::string& emb_path, const std::string& data_path, int example_index,
                const std::string& out_dir) {
  const LoadedData data = load_examples(data_path);
  if (example_index < 0 || example_index >= static_cast<int>(data.examples.size()))
    throw mpqa::ValidationError(0, "example index " + std::to_string(example_index) +
                                       " outside [0, " + std::to_string(data.examples.size()) +
                                       ")");
  RestoredModel rm;
  restore_model(rm, ckpt, vocab_path, emb_path, data);
  fs::create_directories(out_dir);

  const mpqa::McqaExample& ex = data.examples[example_index];
  for (size_t c = 0; c < ex.choices.size(); ++c) {
    mpqa::Tape tape;
    mpqa::AttentionTrace trace;
    std::vector<std::string> labels;
    mpqa::RpbMask mask;
    mpqa::Model::ScoreOptions opts;
    opts.trace = &trace;
    opts.token_labels = &labels;
    opts.mask_out = &mask;
    const double logit = tape.scalar(
        rm.model->score_choice(tape, ex.question, ex.choices[c].text, ex.choices[c].graph, opts));

    const fs::path path = fs::path(out_dir) / ("attention_e" + std::to_string(example_index) +
                                               "_c" + std::to_string(c) + ".tsv");
    std::ofstream out(path.string());
    out << "logit\t" << fmt(logit) << "\n";
    out << "tokens";
    for (const std::string& l : labels) out << '\t' << l;
    out << "\nomega1_cells";
    for (const auto& cell : mask.omega1_cells) out << '\t' << cell.row << ':' << cell.col;
    out << "\nomega2_cells";
    for (const auto& cell : mask.omega2_cells) out << '\t' << cell.row << ':' << cell.col;
    out << '\n';
    for (const auto& map : trace.maps) {
      out << "layer\t" << map.layer << "\thead\t" << map.head << '\n';
      for (int r = 0; r < map.weights.rows(); ++r) {
        for (int col = 0; col < map.weights.cols(); ++col) {
          if (col) out << '\t';
          out << fmt(map.weights.at(r, col));
        }
        out << '\n';
      }
    }
    std::cout << "attention\t" << path.string() << "\n";
  }
  return 0;
}

std::vector<bool> grid_values(const std::string& mode, const std::string& flag) {
  if (mode == "both") return {true, false};
  if (mode == "on") return {true};
  if (mode == "off") return {false};
  throw mpqa::ConfigError("field '" + flag + "': expected both, on, or off, got '" + mode + "'");
}

int cmd_ablate(const ConfigArgs& cfg_args, const std::string& data_path,
               const std::string& emb_path, const std::string& encoders_csv,
               const std::string& seeds_csv, const std::string& rpb_mode,
               const std::string& drop_mode, const std::string& out_dir) {
  const mpqa::RunConfig base = cfg_args.resolve();
  const LoadedData data = load_examples(data_path);
  const auto emb = maybe_embeddings(emb_path);

  std::vector<mpqa::KgEncoderKind> encoders;
  {
    std::istringstream is(encoders_csv);
    std::string item;
    while (std::getline(is, item, ',')) encoders.push_back(mpqa::kg_encoder_from_string(item));
  }
  std::vector<std::uint64_t> seeds;
  {
    std::istringstream is(seeds_csv);
    std::string item;
    while (std::getline(is, item, ',')) seeds.push_back(std::stoull(item));
  }
  if (encoders.empty() || seeds.empty())
    throw mpqa::ConfigError("ablate needs at least one encoder and one seed");

  std::ostringstream table;
  table << "encoder\trpb\tdrop_mp";
  for (std::uint64_t s : seeds) table << "\tseed" << s;
  table << "\tmean\n";

  for (mpqa::KgEncoderKind encoder : encoders) {
    for (bool rpb : grid_values(rpb_mode, "rpb-grid")) {
      for (bool drop : grid_values(drop_mode, "drop-grid")) {
        const double drop_rate = drop ? (base.drop_mp > 0.0 ? base.drop_mp : 0.1) : 0.0;
        double sum = 0.0;
        table << to_string(encoder) << '\t' << (rpb ? "on" : "off") << '\t' << fmt(drop_rate);
        for (std::uint64_t seed : seeds) {
          mpqa::RunConfig cfg = base;
          cfg.kg_encoder = encoder;
          cfg.rpb = rpb;
          cfg.drop_mp = drop_rate;
          cfg.seed = seed;
          const TrainOutcome outcome =
              run_training(cfg, data, emb ? &*emb : nullptr, "", nullptr);
          sum += outcome.train_accuracy;
          table << '\t' << fmt(outcome.train_accuracy);
        }
        table << '\t' << fmt(sum / static_cast<double>(seeds.size())) << '\n';
      }
    }
  }

  std::cout << table.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out((fs::path(out_dir) / "ablation.tsv").string());
    out << table.str();
    std::cout << "table\t" << (fs::path(out_dir) / "ablation.tsv").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meta-path + context attention experiments over small multi-relational graphs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with matching embeddings");
  std::string gen_task = "hop2";
  int gen_n = 200;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "data";
  int gen_emb_dim = 16;
  gen->add_option("--task", gen_task, "hop1, hop2, or distractor");
  gen->add_option("--n", gen_n, "number of examples")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out-dir", gen_out, "output directory");
  gen->add_option("--emb-dim", gen_emb_dim, "embedding width")->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  ConfigArgs train_cfg;
  std::string train_data;
  std::string train_emb;
  std::string train_out = "out";
  train->add_option("--data", train_data, "dataset (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--embeddings", train_emb, "word embedding table for the bias cells")
      ->check(CLI::ExistingFile);
  train->add_option("--out-dir", train_out, "output directory");
  train_cfg.add_to(*train);

  // eval
  auto* eval = app.add_subcommand("eval", "score a dataset with a trained checkpoint");
  std::string eval_ckpt;
  std::string eval_vocab;
  std::string eval_emb;
  std::string eval_data;
  std::string eval_preds;
  eval->add_option("--checkpoint", eval_ckpt, "training checkpoint")->required();
  eval->add_option("--vocab", eval_vocab, "vocabulary saved next to the checkpoint")->required();
  eval->add_option("--embeddings", eval_emb, "word embedding table")->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "dataset to score")->required()->check(CLI::ExistingFile);
  eval->add_option("--predictions", eval_preds, "write per-example predictions here");

  // inspect
  auto* inspect =
      app.add_subcommand("inspect", "export attention maps and bias cells for one example");
  std::string ins_ckpt;
  std::string ins_vocab;
  std::string ins_emb;
  std::string ins_data;
  int ins_example = 0;
  std::string ins_out = "inspect";
  inspect->add_option("--checkpoint", ins_ckpt, "training checkpoint")->required();
  inspect->add_option("--vocab", ins_vocab, "vocabulary file")->required();
  inspect->add_option("--embeddings", ins_emb, "word embedding table")->check(CLI::ExistingFile);
  inspect->add_option("--data", ins_data, "dataset")->required()->check(CLI::ExistingFile);
  inspect->add_option("--example", ins_example, "example index");
  inspect->add_option("--out-dir", ins_out, "output directory");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train the encoder/rpb/drop grid and tabulate");
  ConfigArgs ablate_cfg;
  std::string abl_data;
  std::string abl_emb;
  std::string abl_encoders = "metapath,node,rn";
  std::string abl_seeds = "0,1,2";
  std::string abl_rpb = "both";
  std::string abl_drop = "both";
  std::string abl_out;
  ablate->add_option("--data", abl_data, "dataset (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  ablate->add_option("--embeddings", abl_emb, "word embedding table")->check(CLI::ExistingFile);
  ablate->add_option("--encoders", abl_encoders, "comma list of graph encoders");
  ablate->add_option("--seeds", abl_seeds, "comma list of seeds");
  ablate->add_option("--rpb-grid", abl_rpb, "both, on, or off");
  ablate->add_option("--drop-grid", abl_drop, "both, on, or off");
  ablate->add_option("--out-dir", abl_out, "also write the table here");
  ablate_cfg.add_to(*ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are exit 2
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_task, gen_n, gen_seed, gen_out, gen_emb_dim);
    if (train->parsed()) return cmd_train(train_cfg, train_data, train_emb, train_out);
    if (eval->parsed()) return cmd_eval(eval_ckpt, eval_vocab, eval_emb, eval_data, eval_preds);
    if (inspect->parsed())
      return cmd_inspect(ins_ckpt, ins_vocab, ins_emb, ins_data, ins_example, ins_out);
    if (ablate->parsed())
      return cmd_ablate(ablate_cfg, abl_data, abl_emb, abl_encoders, abl_seeds, abl_rpb, abl_drop,
                        abl_out);
  } catch (const mpqa::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mpqa::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mpqa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mpqa::CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mpqa::VocabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mpqa::EmbeddingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
