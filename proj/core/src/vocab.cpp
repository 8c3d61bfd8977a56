#include "mpqa/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace mpqa {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, const std::string& origin) {
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second) {
      throw VocabError("duplicate token '" + v.tokens_[i] + "' in " + origin);
    }
  }
  auto require = [&](const char* tok) {
    auto it = v.index_.find(tok);
    if (it == v.index_.end()) throw VocabError(std::string("missing reserved token ") + tok + " in " + origin);
    return it->second;
  };
  v.cls_id_ = require(kCls);
  v.sep_id_ = require(kSep);
  v.unk_id_ = require(kUnk);
  return v;
}

Vocabulary Vocabulary::from_corpus(const std::vector<std::vector<std::string>>& texts) {
  std::set<std::string> words;
  for (const auto& text : texts) words.insert(text.begin(), text.end());
  words.erase(kCls);
  words.erase(kSep);
  words.erase(kUnk);

  std::vector<std::string> tokens = {kCls, kSep, kUnk};
  tokens.insert(tokens.end(), words.begin(), words.end());
  return from_tokens(std::move(tokens), "corpus");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw VocabError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens), path);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw VocabError("cannot write vocabulary file: " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk_id_ : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw VocabError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

}  // namespace mpqa
