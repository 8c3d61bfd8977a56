#include "mpqa/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpqa {

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// cosine similarity; -inf when either operand is the zero vector so masked
/// entries always lose the argmax.
double cosine(const std::vector<double>& a, double na, const std::vector<double>& b, double nb) {
  if (na == 0.0 || nb == 0.0) return -std::numeric_limits<double>::infinity();
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (na * nb);
}

}  // namespace

WordEmbeddings WordEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open embeddings file: " + path);
  WordEmbeddings out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty()) {
      throw EmbeddingError("line " + std::to_string(line_no) + ": no values for '" + word + "'");
    }
    if (out.dim_ == 0) out.dim_ = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != out.dim_) {
      throw EmbeddingError("line " + std::to_string(line_no) + ": dimension " +
                           std::to_string(vec.size()) + " != " + std::to_string(out.dim_));
    }
    out.table_[word] = std::move(vec);
  }
  return out;
}

WordEmbeddings WordEmbeddings::from_pairs(
    int dim, const std::vector<std::pair<std::string, std::vector<double>>>& pairs) {
  WordEmbeddings out;
  out.dim_ = dim;
  for (const auto& [word, vec] : pairs) {
    if (static_cast<int>(vec.size()) != dim) {
      throw EmbeddingError("vector for '" + word + "' has dimension " + std::to_string(vec.size()));
    }
    out.table_[word] = vec;
  }
  return out;
}

void WordEmbeddings::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw EmbeddingError("cannot write embeddings file: " + path);
  out.precision(17);
  for (const auto& [word, vec] : table_) {
    out << word;
    for (double v : vec) out << ' ' << v;
    out << '\n';
  }
}

const std::vector<double>* WordEmbeddings::find(const std::string& word) const {
  auto it = table_.find(word);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<double> WordEmbeddings::phrase_embedding(const std::string& surface) const {
  std::vector<double> acc(dim_, 0.0);
  if (surface.empty()) return acc;

  int words = 0;
  size_t start = 0;
  while (start <= surface.size()) {
    size_t end = surface.find('_', start);
    if (end == std::string::npos) end = surface.size();
    const std::string word = surface.substr(start, end - start);
    if (!word.empty()) {
      ++words;
      if (const auto* vec = find(word)) {
        for (int i = 0; i < dim_; ++i) acc[i] += (*vec)[i];
      }
    }
    start = end + 1;
  }
  if (words > 0) {
    for (double& v : acc) v /= words;
  }
  return acc;
}

RpbMask build_mask(const WordEmbeddings& emb, const std::vector<LmToken>& lm,
                   const std::vector<KgToken>& kg, int token_count, RpbOrientation orientation) {
  RpbMask mask;
  mask.tokens = token_count;

  struct Side {
    int position;
    std::vector<double> vec;
    double norm;
  };
  std::vector<Side> lm_side;
  for (const LmToken& t : lm) {
    if (!t.is_content) continue;
    Side s{t.position, emb.phrase_embedding(t.word), 0.0};
    s.norm = norm(s.vec);
    lm_side.push_back(std::move(s));
  }
  // ties go to the lowest sequence position, so scan in position order
  std::stable_sort(lm_side.begin(), lm_side.end(),
                   [](const Side& a, const Side& b) { return a.position < b.position; });

  struct Endpoint {
    int kg_position;
    std::vector<double> vec;
    double norm;
  };
  std::vector<Endpoint> endpoints;  // head then tail per token
  for (const KgToken& t : kg) {
    for (const std::string* surf : {&t.head_surface, &t.tail_surface}) {
      Endpoint e{t.position, emb.phrase_embedding(*surf), 0.0};
      e.norm = norm(e.vec);
      endpoints.push_back(std::move(e));
    }
  }
  std::stable_sort(endpoints.begin(), endpoints.end(),
                   [](const Endpoint& a, const Endpoint& b) { return a.kg_position < b.kg_position; });

  // omega2: KG endpoint -> best LM content word
  for (const Endpoint& e : endpoints) {
    if (e.norm == 0.0) continue;
    int best_pos = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (const Side& s : lm_side) {
      const double c = cosine(e.vec, e.norm, s.vec, s.norm);
      if (c > best) {  // strict: first (lowest position) wins ties
        best = c;
        best_pos = s.position;
      }
    }
    if (best_pos >= 0) {
      RpbCell cell{best_pos, e.kg_position};
      if (std::find(mask.omega2_cells.begin(), mask.omega2_cells.end(), cell) ==
          mask.omega2_cells.end()) {
        mask.omega2_cells.push_back(cell);  // head/tail may coincide; keep one
      }
    }
  }

  // omega1: LM content word -> best KG endpoint
  for (const Side& s : lm_side) {
    if (s.norm == 0.0) continue;
    int best_pos = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (const Endpoint& e : endpoints) {
      const double c = cosine(e.vec, e.norm, s.vec, s.norm);
      if (c > best) {
        best = c;
        best_pos = e.kg_position;
      }
    }
    if (best_pos >= 0) mask.omega1_cells.push_back({best_pos, s.position});
  }

  if (orientation == RpbOrientation::figure) {
    for (RpbCell& c : mask.omega1_cells) std::swap(c.row, c.col);
    for (RpbCell& c : mask.omega2_cells) std::swap(c.row, c.col);
  }
  return mask;
}

Value realize_omega(Tape& tape, const RpbMask& mask, Value omega1, Value omega2, int token_count) {
  if (mask.tokens != token_count) {
    throw SizeMismatch("mask built for " + std::to_string(mask.tokens) + " tokens, attention has " +
                       std::to_string(token_count));
  }
  const int n = mask.tokens;
  if (mask.omega1_cells.empty() && mask.omega2_cells.empty()) return tape.constant(Matrix(n, n));

  auto pattern_of = [n](const std::vector<RpbCell>& cells) {
    Matrix p(n, n);
    for (const RpbCell& c : cells) p.at(c.row, c.col) = 1.0;
    return p;
  };
  if (mask.omega2_cells.empty()) return tape.masked_scalar(omega1, pattern_of(mask.omega1_cells));
  if (mask.omega1_cells.empty()) return tape.masked_scalar(omega2, pattern_of(mask.omega2_cells));
  return tape.add(tape.masked_scalar(omega1, pattern_of(mask.omega1_cells)),
                  tape.masked_scalar(omega2, pattern_of(mask.omega2_cells)));
}

}  // namespace mpqa
