#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqa/graph.hpp"
#include "mpqa/matcher.hpp"

namespace mpqa {

/// A line of the dataset file could not be read as JSON with the expected
/// shape. `line` is 1-based; 0 means the file itself was unreadable.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// The line parsed but the example violates a graph or MCQA invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct McqaChoice {
  std::vector<std::string> text;
  Subgraph graph;
};

struct McqaExample {
  std::vector<std::string> question;
  std::vector<McqaChoice> choices;
  int answer = 0;
};

bool operator==(const McqaChoice& a, const McqaChoice& b);
bool operator==(const McqaExample& a, const McqaExample& b);

/// Reads one JSON object per line:
///   {"question": [w...], "answer": i, "choices": [{"text": [w...], "graph": {...}}, ...]}
/// with graph = {"nodes": [{"id", "type": "Z|Q|A|O", "surface", "feature"}],
///               "edges": [[head, rel, tail], ...], "num_relations": n,
///               "q_nodes": [...], "a_nodes": [...]}.
/// Files store only base relations (id < num_relations) plus context edges;
/// inverse edges are materialized here, and every graph is validated.
std::vector<McqaExample> load_dataset(const std::string& path);

/// Inverse of load_dataset: strips the materialized inverse edges back out so
/// load(save(x)) == x field-exactly.
void save_dataset(const std::string& path, const std::vector<McqaExample>& data);

enum class SyntheticTask { hop1, hop2, distractor };

SyntheticTask synthetic_task_from_string(const std::string& name);
std::string to_string(SyntheticTask task);

/// Desk-scale MCQA tasks whose correct choice is identifiable only from the
/// knowledge subgraph:
///   hop1       — relation id 0 on a question->answer edge marks the correct
///                choice; wrong choices carry a decoy relation instead.
///   hop2       — the marker is a 2-hop composite relation; every choice has
///                identical 1-hop (head type, relation, tail type) statistics,
///                so 1-hop models sit at chance.
///   distractor — hop1 structure with node surfaces scrambled, so similarity
///                matching is pure noise.
/// All node features are zero vectors and answer indices are uniform, closing
/// the remaining side channels. Deterministic per seed; graphs come back with
/// inverse edges already materialized, like load_dataset output.
std::vector<McqaExample> gen_synthetic(SyntheticTask task, int n, std::uint64_t seed);

/// Every word the generator can emit (question words, choice words, node
/// surfaces), in a fixed order.
const std::vector<std::string>& synthetic_word_list();

/// Random unit-scale embeddings covering synthetic_word_list(), for runs on
/// generated data. Deterministic per seed.
WordEmbeddings synthetic_embeddings(int dim, std::uint64_t seed);

/// All question/choice word sequences of a dataset, ready for
/// Vocabulary::from_corpus.
std::vector<std::vector<std::string>> dataset_word_corpus(const std::vector<McqaExample>& data);

}  // namespace mpqa
