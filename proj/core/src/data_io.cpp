#include "mpqa/data_io.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "mpqa/rng.hpp"

namespace mpqa {

using nlohmann::json;

bool operator==(const McqaChoice& a, const McqaChoice& b) {
  return a.text == b.text && a.graph == b.graph;
}

bool operator==(const McqaExample& a, const McqaExample& b) {
  return a.question == b.question && a.choices == b.choices && a.answer == b.answer;
}

namespace {

const json& require_field(const json& obj, const char* key, int line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  return *it;
}

std::vector<std::string> word_list(const json& j, const char* key, int line) {
  if (!j.is_array()) throw ParseError(line, std::string("'") + key + "' must be a word array");
  std::vector<std::string> out;
  for (const json& w : j) {
    if (!w.is_string()) throw ParseError(line, std::string("'") + key + "' must hold strings");
    out.push_back(w.get<std::string>());
  }
  return out;
}

std::vector<int> int_list(const json& j, const char* key, int line) {
  if (!j.is_array()) throw ParseError(line, std::string("'") + key + "' must be an int array");
  std::vector<int> out;
  for (const json& v : j) {
    if (!v.is_number_integer()) throw ParseError(line, std::string("'") + key + "' must hold ints");
    out.push_back(v.get<int>());
  }
  return out;
}

Subgraph parse_graph(const json& jg, int line) {
  if (!jg.is_object()) throw ParseError(line, "'graph' must be an object");
  Subgraph g;
  const json& jrel = require_field(jg, "num_relations", line);
  if (!jrel.is_number_integer()) throw ParseError(line, "'num_relations' must be an int");
  g.num_relations = jrel.get<int>();

  const json& jnodes = require_field(jg, "nodes", line);
  if (!jnodes.is_array()) throw ParseError(line, "'nodes' must be an array");
  for (const json& jn : jnodes) {
    if (!jn.is_object()) throw ParseError(line, "node entries must be objects");
    Node n;
    const json& jid = require_field(jn, "id", line);
    if (!jid.is_number_integer()) throw ParseError(line, "node 'id' must be an int");
    n.id = jid.get<int>();
    const json& jtype = require_field(jn, "type", line);
    if (!jtype.is_string() || jtype.get<std::string>().size() != 1)
      throw ParseError(line, "node 'type' must be one of \"Z\",\"Q\",\"A\",\"O\"");
    try {
      n.type = node_type_from_char(jtype.get<std::string>()[0]);
    } catch (const GraphError& e) {
      throw ParseError(line, e.what());
    }
    const json& jsurface = require_field(jn, "surface", line);
    if (!jsurface.is_string()) throw ParseError(line, "node 'surface' must be a string");
    n.surface = jsurface.get<std::string>();
    const json& jfeat = require_field(jn, "feature", line);
    if (!jfeat.is_array()) throw ParseError(line, "node 'feature' must be a float array");
    for (const json& v : jfeat) {
      if (!v.is_number()) throw ParseError(line, "node 'feature' must hold numbers");
      n.feature.push_back(v.get<double>());
    }
    g.nodes.push_back(std::move(n));
  }

  const json& jedges = require_field(jg, "edges", line);
  if (!jedges.is_array()) throw ParseError(line, "'edges' must be an array");
  for (const json& je : jedges) {
    if (!je.is_array() || je.size() != 3 || !je[0].is_number_integer() ||
        !je[1].is_number_integer() || !je[2].is_number_integer())
      throw ParseError(line, "edges must be [head, relation, tail] int triples");
    g.edges.push_back({je[0].get<int>(), je[1].get<int>(), je[2].get<int>()});
  }

  g.q_nodes = int_list(require_field(jg, "q_nodes", line), "q_nodes", line);
  g.a_nodes = int_list(require_field(jg, "a_nodes", line), "a_nodes", line);
  return g;
}

json graph_to_json(const Subgraph& g) {
  json jg;
  jg["num_relations"] = g.num_relations;
  json jnodes = json::array();
  for (const Node& n : g.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["type"] = std::string(1, node_type_char(n.type));
    jn["surface"] = n.surface;
    jn["feature"] = n.feature;
    jnodes.push_back(std::move(jn));
  }
  jg["nodes"] = std::move(jnodes);
  json jedges = json::array();
  for (const Edge& e : g.edges) {
    // Inverse edges are an in-memory artifact; files carry base + context only.
    if (e.relation >= g.num_relations && e.relation != g.context_relation()) continue;
    jedges.push_back(json::array({e.head, e.relation, e.tail}));
  }
  jg["edges"] = std::move(jedges);
  jg["q_nodes"] = g.q_nodes;
  jg["a_nodes"] = g.a_nodes;
  return jg;
}

}  // namespace

std::vector<McqaExample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");

  std::vector<McqaExample> out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;

    json j = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ParseError(line_no, "not valid JSON");
    if (!j.is_object()) throw ParseError(line_no, "each line must be a JSON object");

    McqaExample ex;
    ex.question = word_list(require_field(j, "question", line_no), "question", line_no);
    const json& janswer = require_field(j, "answer", line_no);
    if (!janswer.is_number_integer()) throw ParseError(line_no, "'answer' must be an int");
    ex.answer = janswer.get<int>();

    const json& jchoices = require_field(j, "choices", line_no);
    if (!jchoices.is_array()) throw ParseError(line_no, "'choices' must be an array");
    for (const json& jc : jchoices) {
      if (!jc.is_object()) throw ParseError(line_no, "choice entries must be objects");
      McqaChoice choice;
      choice.text = word_list(require_field(jc, "text", line_no), "text", line_no);
      Subgraph base = parse_graph(require_field(jc, "graph", line_no), line_no);
      try {
        choice.graph = add_inverse_edges(base);
        validate(choice.graph);
      } catch (const GraphError& e) {
        throw ValidationError(line_no, e.what());
      }
      ex.choices.push_back(std::move(choice));
    }

    if (ex.choices.size() < 2)
      throw ValidationError(line_no, "an example needs at least 2 choices, got " +
                                         std::to_string(ex.choices.size()));
    if (ex.answer < 0 || ex.answer >= static_cast<int>(ex.choices.size()))
      throw ValidationError(line_no, "answer index " + std::to_string(ex.answer) +
                                         " outside [0, " + std::to_string(ex.choices.size()) + ")");
    out.push_back(std::move(ex));
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<McqaExample>& data) {
  std::ofstream out(path);
  if (!out) throw ParseError(0, "cannot open '" + path + "' for writing");
  for (const McqaExample& ex : data) {
    json j;
    j["question"] = ex.question;
    j["answer"] = ex.answer;
    json jchoices = json::array();
    for (const McqaChoice& c : ex.choices) {
      json jc;
      jc["text"] = c.text;
      jc["graph"] = graph_to_json(c.graph);
      jchoices.push_back(std::move(jc));
    }
    j["choices"] = std::move(jchoices);
    out << j.dump() << '\n';
  }
}

SyntheticTask synthetic_task_from_string(const std::string& name) {
  if (name == "hop1") return SyntheticTask::hop1;
  if (name == "hop2") return SyntheticTask::hop2;
  if (name == "distractor") return SyntheticTask::distractor;
  throw std::invalid_argument("unknown synthetic task '" + name +
                              "' (expected hop1, hop2, or distractor)");
}

std::string to_string(SyntheticTask task) {
  switch (task) {
    case SyntheticTask::hop1: return "hop1";
    case SyntheticTask::hop2: return "hop2";
    case SyntheticTask::distractor: return "distractor";
  }
  return "?";
}

namespace {

constexpr int kChoices = 3;
constexpr int kFeatureDim = 4;
const char* const kTemplate[] = {"which", "item", "relates", "here"};
const char* const kTopics[] = {"circuit", "harbor", "meadow"};
const char* const kAnswerPool[] = {"glove",  "anchor", "lantern", "pepper",
                                   "violin", "cobalt", "thimble", "walnut"};
const char* const kOtherSurface = "junction";

std::vector<std::string> pick_distinct(std::mt19937_64& rng, int k) {
  std::vector<int> order(std::size(kAnswerPool));
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(order, rng);
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(kAnswerPool[order[i]]);
  return out;
}

std::string join_underbar(const std::vector<std::string>& words) {
  std::string s;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) s += '_';
    s += words[i];
  }
  return s;
}

Node zero_node(int id, NodeType type, std::string surface) {
  Node n;
  n.id = id;
  n.type = type;
  n.surface = std::move(surface);
  n.feature.assign(kFeatureDim, 0.0);
  return n;
}

/// hop1/distractor: the marker is relation 0 on the q->a edge (decoy: 1);
/// relation 2 feeds a bystander so every graph has some 2-hop structure.
Subgraph hop1_graph(bool correct, const std::string& q_surface, const std::string& a_surface,
                    const std::string& o_surface) {
  Subgraph g;
  g.num_relations = 3;
  g.nodes = {zero_node(0, NodeType::Q, q_surface), zero_node(1, NodeType::A, a_surface),
             zero_node(2, NodeType::O, o_surface)};
  g.q_nodes = {0};
  g.a_nodes = {1};
  g.edges = {{0, correct ? 0 : 1, 1}, {0, 2, 2}};
  return add_inverse_edges(g);
}

/// hop2: the only forward 2-hop q->a path reads composite (0,1) in the correct
/// graph and (1,0) in the wrong ones. The two filler edges balance the books:
/// each choice contains exactly one of every (head type, relation, tail type)
/// triple, so 1-hop statistics carry no signal.
Subgraph hop2_graph(bool correct, const std::string& q_surface, const std::string& a_surface) {
  Subgraph g;
  g.num_relations = 2;
  g.nodes = {zero_node(0, NodeType::Q, q_surface), zero_node(1, NodeType::A, a_surface),
             zero_node(2, NodeType::O, kOtherSurface), zero_node(3, NodeType::O, kOtherSurface),
             zero_node(4, NodeType::O, kOtherSurface)};
  g.q_nodes = {0};
  g.a_nodes = {1};
  if (correct) {
    g.edges = {{0, 0, 2}, {2, 1, 1}, {0, 1, 3}, {4, 0, 1}};
  } else {
    g.edges = {{0, 1, 2}, {2, 0, 1}, {0, 0, 3}, {4, 1, 1}};
  }
  return add_inverse_edges(g);
}

}  // namespace

std::vector<McqaExample> gen_synthetic(SyntheticTask task, int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("gen_synthetic needs n > 0, got " + std::to_string(n));
  std::mt19937_64 rng(seed);
  const std::vector<std::string>& all_words = synthetic_word_list();

  std::vector<McqaExample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    McqaExample ex;
    const std::string topic = kTopics[uniform_index(rng, std::size(kTopics))];
    ex.question.assign(std::begin(kTemplate), std::end(kTemplate));
    ex.question.push_back(topic);
    ex.answer = static_cast<int>(uniform_index(rng, kChoices));

    for (int c = 0; c < kChoices; ++c) {
      McqaChoice choice;
      choice.text = pick_distinct(rng, 3);
      const bool correct = (c == ex.answer);
      switch (task) {
        case SyntheticTask::hop1:
          choice.graph = hop1_graph(correct, topic, join_underbar(choice.text), kOtherSurface);
          break;
        case SyntheticTask::hop2:
          choice.graph = hop2_graph(correct, topic, join_underbar(choice.text));
          break;
        case SyntheticTask::distractor: {
          const std::string q_s = all_words[uniform_index(rng, all_words.size())];
          const std::string a_s = all_words[uniform_index(rng, all_words.size())];
          const std::string o_s = all_words[uniform_index(rng, all_words.size())];
          choice.graph = hop1_graph(correct, q_s, a_s, o_s);
          break;
        }
      }
      ex.choices.push_back(std::move(choice));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

const std::vector<std::string>& synthetic_word_list() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w(std::begin(kTemplate), std::end(kTemplate));
    w.insert(w.end(), std::begin(kTopics), std::end(kTopics));
    w.insert(w.end(), std::begin(kAnswerPool), std::end(kAnswerPool));
    w.push_back(kOtherSurface);
    return w;
  }();
  return words;
}

WordEmbeddings synthetic_embeddings(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::pair<std::string, std::vector<double>>> pairs;
  for (const std::string& word : synthetic_word_list()) {
    std::vector<double> v(dim);
    for (double& x : v) x = normal01(rng) * scale;
    pairs.emplace_back(word, std::move(v));
  }
  return WordEmbeddings::from_pairs(dim, pairs);
}

std::vector<std::vector<std::string>> dataset_word_corpus(const std::vector<McqaExample>& data) {
  std::vector<std::vector<std::string>> corpus;
  for (const McqaExample& ex : data) {
    corpus.push_back(ex.question);
    for (const McqaChoice& c : ex.choices) corpus.push_back(c.text);
  }
  return corpus;
}

}  // namespace mpqa
