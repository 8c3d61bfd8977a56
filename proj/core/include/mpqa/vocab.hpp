#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mpqa {

struct VocabError : std::runtime_error {
  explicit VocabError(const std::string& what) : std::runtime_error(what) {}
};

/// Token table for the context encoder. Ids are line numbers in the saved
/// file. Three reserved tokens always exist: <cls>, <sep>, <unk>.
class Vocabulary {
 public:
  static constexpr const char* kCls = "<cls>";
  static constexpr const char* kSep = "<sep>";
  static constexpr const char* kUnk = "<unk>";

  /// Reserved tokens first (ids 0..2), then the sorted unique corpus words.
  static Vocabulary from_corpus(const std::vector<std::vector<std::string>>& texts);

  /// One token per line, line number = id. The reserved tokens must be present.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  /// Unknown words map to the <unk> id.
  int id(const std::string& token) const;
  const std::string& token(int id) const;  // VocabError when out of range
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  int size() const { return static_cast<int>(tokens_.size()); }

  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  int unk_id() const { return unk_id_; }

 private:
  static Vocabulary from_tokens(std::vector<std::string> tokens, const std::string& origin);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int cls_id_ = -1;
  int sep_id_ = -1;
  int unk_id_ = -1;
};

}  // namespace mpqa
