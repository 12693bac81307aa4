#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/rng.hpp"
#include "schemabind/tensor.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

using Embedding = std::vector<double>;

// IID standard-normal entries scaled to unit Euclidean norm.
inline Embedding new_embedding(int dim, Rng& rng) {
  if (dim < 1) throw DimensionError("invalid dimension: embedding dim must be >= 1");
  Embedding e(static_cast<size_t>(dim));
  double norm2 = 0.0;
  for (auto& x : e) {
    x = rng.normal();
    norm2 += x * x;
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : e) x *= inv;
  return e;
}

// Adds delta at indices 0, 2, 4, ...; no renormalization afterward.
inline Embedding bias_even_indices(const Embedding& e, double delta) {
  Embedding out = e;
  for (size_t i = 0; i < out.size(); i += 2) out[i] += delta;
  return out;
}

// Word -> embedding table. Every embedding is derived from (seed, word id,
// generation tag), so regeneration is order-independent and bit-identical.
// Nonsense words are ordinary entries whose id starts with "nonsense".
class Lexicon {
 public:
  Lexicon(uint64_t seed, int dim) : seed_(seed), dim_(dim) {
    if (dim < 1) throw DimensionError("invalid dimension: lexicon dim must be >= 1");
  }

  uint64_t seed() const { return seed_; }
  int dim() const { return dim_; }
  size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  static bool is_nonsense(const std::string& id) { return id.rfind("nonsense", 0) == 0; }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  Embedding derive(const std::string& id, uint64_t tag = 0) const {
    Rng rng(derive_seed(seed_, id, tag));
    return new_embedding(dim_, rng);
  }

  const Embedding& add_word(const std::string& id, uint64_t tag = 0) {
    auto it = index_.find(id);
    if (it != index_.end()) return embs_[it->second];
    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    embs_.push_back(derive(id, tag));
    return embs_.back();
  }

  void set_embedding(const std::string& id, Embedding e) {
    if (static_cast<int>(e.size()) != dim_)
      throw DimensionError("embedding length does not match lexicon dim");
    auto it = index_.find(id);
    if (it == index_.end()) {
      index_.emplace(id, ids_.size());
      ids_.push_back(id);
      embs_.push_back(std::move(e));
    } else {
      embs_[it->second] = std::move(e);
    }
  }

  // Fresh vector for an already-known word (per-batch filler regeneration).
  void regenerate(const std::string& id, uint64_t tag) {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown word: " + id);
    embs_[it->second] = derive(id, tag);
  }

  const Embedding& embedding(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown word: " + id);
    return embs_[it->second];
  }

  std::string to_text() const {
    std::string out = "#dim=" + std::to_string(dim_) + " seed=" + std::to_string(seed_) + "\n";
    char buf[40];
    for (size_t i = 0; i < ids_.size(); ++i) {
      out += ids_[i];
      out += '\t';
      for (size_t j = 0; j < embs_[i].size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", embs_[i][j]);
        if (j) out += ',';
        out += buf;
      }
      out += '\n';
    }
    return out;
  }

  static Lexicon from_text(const std::string& text) {
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0].rfind("#dim=", 0) != 0)
      throw DataError("lexicon text: missing #dim header");
    int dim = 0;
    unsigned long long seed = 0;
    if (std::sscanf(lines[0].c_str(), "#dim=%d seed=%llu", &dim, &seed) != 2)
      throw DataError("lexicon text: malformed header: " + lines[0]);
    Lexicon lex(seed, dim);
    for (size_t li = 1; li < lines.size(); ++li) {
      if (lines[li].empty()) continue;
      auto parts = split(lines[li], '\t');
      if (parts.size() != 2) throw DataError("lexicon text: malformed line " + std::to_string(li + 1));
      auto nums = split(parts[1], ',');
      if (static_cast<int>(nums.size()) != dim)
        throw DataError("lexicon text: wrong embedding length on line " + std::to_string(li + 1));
      Embedding e(nums.size());
      for (size_t j = 0; j < nums.size(); ++j) e[j] = std::strtod(nums[j].c_str(), nullptr);
      lex.set_embedding(parts[0], std::move(e));
    }
    return lex;
  }

 private:
  uint64_t seed_;
  int dim_;
  std::vector<std::string> ids_;
  std::vector<Embedding> embs_;
  std::unordered_map<std::string, size_t> index_;
};

// The candidate set for decoding predictions: ordered, duplicate-free.
struct Corpus {
  std::vector<std::string> ids;
  std::vector<Embedding> embs;

  size_t size() const { return ids.size(); }

  int index_of(const std::string& id) const {
    for (size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return static_cast<int>(i);
    return -1;
  }
};

inline Corpus build_corpus(const Lexicon& lex, const std::vector<std::string>& fixed_words,
                           const std::vector<std::string>& batch_fillers) {
  Corpus corpus;
  std::unordered_map<std::string, bool> seen;
  auto push = [&](const std::string& id) {
    if (seen.emplace(id, true).second) {
      corpus.ids.push_back(id);
      corpus.embs.push_back(lex.embedding(id));
    }
  };
  for (const auto& id : fixed_words) push(id);
  for (const auto& id : batch_fillers) push(id);
  if (corpus.ids.empty()) throw DataError("empty corpus");
  return corpus;
}

// 1/|corpus|; corpora of size < 2 make exact-match accuracy meaningless.
inline double chance_rate(const Corpus& corpus) {
  if (corpus.size() < 2) throw DataError("corpus too small for a chance rate (size < 2)");
  return 1.0 / static_cast<double>(corpus.size());
}

namespace detail {
inline std::vector<double> corpus_similarities(const std::vector<double>& output,
                                               const Corpus& corpus) {
  double on2 = 0.0;
  for (double x : output) on2 += x * x;
  if (on2 == 0.0) throw NumericError("undefined similarity: output vector is all zero");
  std::vector<double> sims(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus.embs[i];
    double num = 0.0, en2 = 0.0;
    for (size_t j = 0; j < e.size(); ++j) {
      num += output[j] * e[j];
      en2 += e[j] * e[j];
    }
    sims[i] = num / (std::sqrt(on2) * std::sqrt(en2));
  }
  return sims;
}
}  // namespace detail

// Highest cosine similarity wins; ties go to the lowest corpus index.
inline const std::string& nearest_word(const std::vector<double>& output, const Corpus& corpus) {
  if (corpus.size() == 0) throw DataError("empty corpus");
  auto sims = detail::corpus_similarities(output, corpus);
  size_t best = 0;
  for (size_t i = 1; i < sims.size(); ++i)
    if (sims[i] > sims[best]) best = i;
  return corpus.ids[best];
}

// 1 - rank(target)/|corpus| with 1-based rank by descending similarity,
// ties resolved by corpus order.
inline double ranking_score(const std::vector<double>& output, const std::string& target,
                            const Corpus& corpus) {
  int t = corpus.index_of(target);
  if (t < 0) throw DataError("missing target: " + target + " not in corpus");
  auto sims = detail::corpus_similarities(output, corpus);
  int rank = 1;
  for (size_t i = 0; i < sims.size(); ++i) {
    if (sims[i] > sims[t]) ++rank;
    else if (sims[i] == sims[t] && static_cast<int>(i) < t) ++rank;
  }
  return 1.0 - static_cast<double>(rank) / static_cast<double>(corpus.size());
}

}  // namespace schemabind
