#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpqa/matrix.hpp"
#include "mpqa/tape.hpp"

namespace mpqa {

struct EmbeddingError : std::runtime_error {
  explicit EmbeddingError(const std::string& what) : std::runtime_error(what) {}
};
struct SizeMismatch : ShapeMismatch {
  explicit SizeMismatch(const std::string& what) : ShapeMismatch(what) {}
};

/// Fixed (non-trainable) word vector table used purely for entity matching.
class WordEmbeddings {
 public:
  WordEmbeddings() = default;

  /// Text format, one entry per line: word v1 v2 ... vd (whitespace-separated).
  static WordEmbeddings load(const std::string& path);
  static WordEmbeddings from_pairs(int dim,
                                   const std::vector<std::pair<std::string, std::vector<double>>>& pairs);
  void save(const std::string& path) const;

  int dim() const { return dim_; }
  size_t size() const { return table_.size(); }
  const std::vector<double>* find(const std::string& word) const;

  /// Mean over the underbar-separated words of the surface; unknown words
  /// contribute zero vectors but still count toward the mean, matching
  /// "average of the word embeddings". Empty or all-unknown surfaces give the
  /// zero vector.
  std::vector<double> phrase_embedding(const std::string& surface) const;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

/// Which way the learned bias cells are laid out; `figure` transposes every
/// cell relative to the indicator-math default.
enum class RpbOrientation { literal, figure };

struct RpbCell {
  int row = 0;
  int col = 0;
  bool operator==(const RpbCell&) const = default;
};

/// Sparse description of the attention-bias matrix: listed cells take the
/// per-head omega1/omega2 scalars, everything else is 0.
struct RpbMask {
  int tokens = 0;
  std::vector<RpbCell> omega1_cells;
  std::vector<RpbCell> omega2_cells;
};

/// One fused-sequence position on the context side.
struct LmToken {
  int position = 0;
  std::string word;
  bool is_content = true;  // false for cls/sep, which never match
};

/// One fused-sequence position on the graph side with its endpoint surfaces.
/// Tokens without surfaces (e.g. pooled baseline summaries) use empty strings
/// and simply never match.
struct KgToken {
  int position = 0;
  std::string head_surface;
  std::string tail_surface;
};

/// Builds the bias-cell assignment by cosine argmax, both directions:
/// - omega2: each KG endpoint picks its most similar LM content word; marked
///   at (LM position, KG position), at most two cells per KG token.
/// - omega1: each LM content word picks its most similar KG endpoint; marked
///   at (KG position, LM position), exactly one cell per matchable word.
/// Zero phrase vectors never match; ties go to the lowest position.
RpbMask build_mask(const WordEmbeddings& emb, const std::vector<LmToken>& lm,
                   const std::vector<KgToken>& kg, int token_count,
                   RpbOrientation orientation = RpbOrientation::literal);

/// Dense differentiable n x n bias with the two scalars substituted into
/// their cells. token_count re-checks the attention size (SizeMismatch).
Value realize_omega(Tape& tape, const RpbMask& mask, Value omega1, Value omega2, int token_count);

}  // namespace mpqa
