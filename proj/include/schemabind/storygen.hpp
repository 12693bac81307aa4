#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/lexicon.hpp"
#include "schemabind/rng.hpp"
#include "schemabind/schema.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

constexpr const char* kNonsenseWord = "nonsense";

struct Story {
  std::vector<std::string> tokens;
  std::map<std::string, std::string> bindings;  // role -> filler word id
  std::vector<int> path;
};

struct Example {
  std::vector<std::string> input;  // fixed length L, final token is the query
  std::string query;
  std::string answer;  // empty when no correct answer is defined

  // generation metadata; not part of the dataset line format
  std::vector<int> path;
  std::map<std::string, std::string> bindings;
  std::vector<std::string> fillers;  // every filler id generated for this example
  int noise_pos = -1;
};

// Random walk from the start state; every role bound once. Roles that share
// a filler pool (same id list) are dealt distinct fillers within one story.
inline Story sample_story(const SchemaGraph& g,
                          const std::map<std::string, std::vector<std::string>>& pools, Rng& rng) {
  Story story;
  int s = g.start;
  std::map<std::string, std::vector<std::string>> used_by_pool;  // pool key -> used fillers
  for (;;) {
    story.path.push_back(s);
    for (const auto& tok : g.states[s].tokens) {
      if (!tok.is_role) {
        story.tokens.push_back(tok.text);
        continue;
      }
      auto bound = story.bindings.find(tok.text);
      if (bound == story.bindings.end()) {
        auto pit = pools.find(tok.text);
        if (pit == pools.end() || pit->second.empty())
          throw DataError("empty pool for role " + tok.text);
        const auto& pool = pit->second;
        std::string pool_key;
        for (const auto& f : pool) {
          pool_key += f;
          pool_key += '\x1f';
        }
        auto& used = used_by_pool[pool_key];
        std::vector<const std::string*> avail;
        for (const auto& f : pool)
          if (std::find(used.begin(), used.end(), f) == used.end()) avail.push_back(&f);
        if (avail.empty()) throw DataError("pool exhausted for role " + tok.text);
        const std::string& pick = *avail[rng.below(avail.size())];
        used.push_back(pick);
        bound = story.bindings.emplace(tok.text, pick).first;
      }
      story.tokens.push_back(bound->second);
    }
    const auto& succ = g.states[s].successors;
    if (succ.empty()) break;
    s = succ.size() == 1 ? succ[0] : succ[static_cast<size_t>(rng.below(succ.size()))];
  }
  return story;
}

// One nonsense word at a uniformly random slot inside the story, nonsense
// padding up to L-1, query appended last.
inline Example assemble_input(const Story& story, const std::string& query, int L, Rng& rng) {
  auto role = SchemaGraph::role_of_query(query);
  auto bound = story.bindings.find(role);
  if (bound == story.bindings.end())
    throw DataError("query " + query + " is not answerable for this story");
  int n = static_cast<int>(story.tokens.size());
  if (n + 2 > L)
    throw DataError("story too long: " + std::to_string(n) + " tokens with L=" + std::to_string(L));

  Example ex;
  ex.query = query;
  ex.answer = bound->second;
  ex.path = story.path;
  ex.bindings = story.bindings;
  ex.noise_pos = static_cast<int>(rng.below(static_cast<uint64_t>(n) + 1));
  ex.input.reserve(L);
  for (int i = 0; i < n; ++i) {
    if (i == ex.noise_pos) ex.input.push_back(kNonsenseWord);
    ex.input.push_back(story.tokens[i]);
  }
  if (ex.noise_pos == n) ex.input.push_back(kNonsenseWord);
  while (static_cast<int>(ex.input.size()) < L - 1) ex.input.push_back(kNonsenseWord);
  ex.input.push_back(query);
  return ex;
}

struct Dataset {
  int L = 0;
  std::string schema_hash;
  uint64_t seed = 0;
  std::string experiment;
  std::vector<Example> examples;

  std::string to_text() const {
    std::string out = "#L=" + std::to_string(L) + " schema=" + schema_hash +
                      " seed=" + std::to_string(seed) + " experiment=" + experiment + "\n";
    for (const auto& ex : examples) {
      for (size_t i = 0; i < ex.input.size(); ++i) {
        if (i) out += ' ';
        out += ex.input[i];
      }
      out += '\t';
      out += ex.query;
      out += '\t';
      out += ex.answer;
      out += '\n';
    }
    return out;
  }

  // Candidate filler ids for unlimited-filler examples follow the pattern
  // <stem>.<Role>.<k>; given the role list they can be rebuilt from tokens.
  static Dataset from_text(const std::string& text,
                           const std::vector<std::string>* candidate_roles = nullptr) {
    Dataset ds;
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0].rfind("#L=", 0) != 0)
      throw DataError("dataset text: missing #L header");
    char hash_buf[80] = {0};
    unsigned long long seed = 0;
    char exp_buf[40] = {0};
    int L = 0;
    if (std::sscanf(lines[0].c_str(), "#L=%d schema=%79s seed=%llu experiment=%39s", &L, hash_buf,
                    &seed, exp_buf) != 4)
      throw DataError("dataset text: malformed header: " + lines[0]);
    ds.L = L;
    ds.schema_hash = hash_buf;
    ds.seed = seed;
    ds.experiment = exp_buf;
    for (size_t li = 1; li < lines.size(); ++li) {
      if (lines[li].empty()) continue;
      auto parts = split(lines[li], '\t');
      if (parts.size() != 3)
        throw DataError("dataset text: malformed line " + std::to_string(li + 1));
      Example ex;
      ex.input = split_ws(parts[0]);
      ex.query = parts[1];
      ex.answer = parts[2];
      if (static_cast<int>(ex.input.size()) != L)
        throw DataError("dataset text: wrong input length on line " + std::to_string(li + 1));
      if (candidate_roles) {
        std::unordered_set<std::string> stems;
        for (const auto& tok : ex.input) {
          auto dot = tok.find('.');
          if (dot != std::string::npos && tok.rfind("f", 0) == 0) stems.insert(tok.substr(0, dot));
        }
        for (const auto& stem : stems)
          for (const auto& role : *candidate_roles)
            for (int k = 0; k < 2; ++k)
              ex.fillers.push_back(stem + "." + role + "." + std::to_string(k));
      }
      ds.examples.push_back(std::move(ex));
    }
    return ds;
  }
};

// Role -> pool-name grouping. The default mirrors the story domain: the four
// person roles share one pool, everything else shares a consumable pool.
struct PoolSpec {
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;  // pool name -> roles

  static PoolSpec default_for(const SchemaGraph& g) {
    static const std::vector<std::string> person_roles = {"Subject", "Friend", "Emcee", "Poet"};
    PoolSpec spec;
    std::vector<std::string> persons, consumables;
    for (const auto& r : g.roles) {
      if (std::find(person_roles.begin(), person_roles.end(), r) != person_roles.end())
        persons.push_back(r);
      else
        consumables.push_back(r);
    }
    if (!persons.empty()) spec.groups.emplace_back("person", persons);
    if (!consumables.empty()) spec.groups.emplace_back("consumable", consumables);
    return spec;
  }

  // Materialize filler ids pool<first..first+count) per group and the
  // role -> filler-list map used by sample_story.
  std::map<std::string, std::vector<std::string>> make_pools(int first, int count,
                                                             std::vector<std::string>* all_fillers)
      const {
    std::map<std::string, std::vector<std::string>> pools;
    for (const auto& [name, roles] : groups) {
      std::vector<std::string> fillers;
      for (int i = first; i < first + count; ++i) fillers.push_back(name + std::to_string(i));
      if (all_fillers)
        all_fillers->insert(all_fillers->end(), fillers.begin(), fillers.end());
      for (const auto& role : roles) pools[role] = fillers;
    }
    return pools;
  }
};

// Everything the harness needs to train and evaluate on one experiment.
struct ExperimentData {
  Dataset train;
  Dataset test;
  Lexicon lexicon;
  std::vector<std::string> fixed_words;  // frame words + queries + nonsense
  std::vector<std::string> train_pool;   // filler ids available during training
  bool unlimited = false;                // regenerate batch fillers every step
  int L = 0;

  ExperimentData() : lexicon(0, 1) {}
};

namespace detail {

inline std::string example_key(const Example& ex) {
  std::string key;
  for (const auto& t : ex.input) {
    key += t;
    key += ' ';
  }
  return key;
}

inline std::string triple_key(const Example& ex) {
  std::string key;
  for (int s : ex.path) {
    key += std::to_string(s);
    key += ',';
  }
  key += '|';
  for (const auto& [role, filler] : ex.bindings) {
    key += role;
    key += '=';
    key += filler;
    key += ';';
  }
  key += '|';
  key += ex.query;
  return key;
}

inline Lexicon base_lexicon(const SchemaGraph& g, uint64_t seed,
                            std::vector<std::string>* fixed_words, int dim = 50) {
  Lexicon lex(seed, dim);
  std::vector<std::string> fixed;
  for (const auto& w : g.frame_words()) fixed.push_back(w);
  for (const auto& q : g.queries) fixed.push_back(q);
  fixed.push_back(kNonsenseWord);
  for (const auto& w : fixed) lex.add_word(w);
  if (fixed_words) *fixed_words = fixed;
  return lex;
}

// Draw (story, query, noise) examples and keep the first occurrence of every
// distinct input sequence.
inline std::vector<Example> draw_unique(const SchemaGraph& g,
                                        const std::map<std::string, std::vector<std::string>>& pools,
                                        int L, long n_draws, Rng& rng) {
  std::vector<Example> out;
  std::unordered_set<std::string> seen;
  for (long i = 0; i < n_draws; ++i) {
    Story story = sample_story(g, pools, rng);
    auto queries = g.queries_on_path(story.path);
    if (queries.empty()) throw DataError("schema path with no answerable query");
    const auto& q = queries[rng.below(queries.size())];
    Example ex = assemble_input(story, q, L, rng);
    if (seen.insert(example_key(ex)).second) out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace detail

// Limited filler training, one shared pool for train and test. Examples are
// deduplicated on the full input sequence and split 80/20 so that no
// (path, bindings, query) triple crosses the split.
inline ExperimentData build_experiment1(const SchemaGraph& g, const std::string& schema_hash,
                                        uint64_t seed, long n_draws = 100000,
                                        int n_fillers_per_role = 6, double split = 0.8) {
  ExperimentData data;
  data.L = g.input_length();
  data.lexicon = detail::base_lexicon(g, seed, &data.fixed_words);
  auto pools = PoolSpec::default_for(g).make_pools(0, n_fillers_per_role, &data.train_pool);
  for (const auto& f : data.train_pool) data.lexicon.add_word(f);

  Rng rng(derive_seed(seed, "experiment1"));
  auto unique = detail::draw_unique(g, pools, data.L, n_draws, rng);

  // group by triple, shuffle groups, fill the test side up to 1-split
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < unique.size(); ++i) {
    auto key = detail::triple_key(unique[i]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  Rng split_rng(derive_seed(seed, "experiment1 split"));
  split_rng.shuffle(order);
  size_t test_target = static_cast<size_t>((1.0 - split) * static_cast<double>(unique.size()));
  std::vector<char> in_test(unique.size(), 0);
  size_t test_count = 0;
  for (const auto& key : order) {
    if (test_count >= test_target) break;
    for (size_t i : groups[key]) {
      in_test[i] = 1;
      ++test_count;
    }
  }
  for (auto& ds : {&data.train, &data.test}) {
    ds->L = data.L;
    ds->schema_hash = schema_hash;
    ds->seed = seed;
    ds->experiment = "1";
  }
  for (size_t i = 0; i < unique.size(); ++i)
    (in_test[i] ? data.test : data.train).examples.push_back(std::move(unique[i]));
  return data;
}

// Limited filler training with disjoint train/test pools. The two draw
// budgets are fractions of n_draws chosen so that the full-scale run lands
// on the published set sizes.
inline ExperimentData build_experiment2(const SchemaGraph& g, const std::string& schema_hash,
                                        uint64_t seed, long n_draws = 100000,
                                        int n_fillers_per_role = 6, double train_frac = 0.915,
                                        double test_frac = 0.036) {
  ExperimentData data;
  data.L = g.input_length();
  data.lexicon = detail::base_lexicon(g, seed, &data.fixed_words);
  auto spec = PoolSpec::default_for(g);
  std::vector<std::string> test_pool;
  auto train_pools = spec.make_pools(0, n_fillers_per_role, &data.train_pool);
  auto test_pools = spec.make_pools(n_fillers_per_role, n_fillers_per_role, &test_pool);
  for (const auto& f : data.train_pool) data.lexicon.add_word(f);
  for (const auto& f : test_pool) data.lexicon.add_word(f);

  Rng rng_train(derive_seed(seed, "experiment2 train"));
  Rng rng_test(derive_seed(seed, "experiment2 test"));
  long train_draws = static_cast<long>(train_frac * static_cast<double>(n_draws));
  long test_draws = static_cast<long>(test_frac * static_cast<double>(n_draws));
  data.train.examples = detail::draw_unique(g, train_pools, data.L, train_draws, rng_train);
  data.test.examples = detail::draw_unique(g, test_pools, data.L, test_draws, rng_test);
  for (auto& ds : {&data.train, &data.test}) {
    ds->L = data.L;
    ds->schema_hash = schema_hash;
    ds->seed = seed;
    ds->experiment = "2";
  }
  return data;
}

// Unlimited filler training: one example per distinguishable (path, query)
// pair in each split, with fresh filler vectors for every example. Two
// candidates per role are generated (and enter evaluation corpora) even when
// a role is absent from the path.
inline ExperimentData build_experiment3(const SchemaGraph& g, const std::string& schema_hash,
                                        uint64_t seed) {
  constexpr int kCandidatesPerRole = 2;
  ExperimentData data;
  data.L = g.input_length();
  data.lexicon = detail::base_lexicon(g, seed, &data.fixed_words);
  data.unlimited = true;

  auto paths = g.enumerate_paths();
  for (auto& [ds, tag] : {std::pair<Dataset*, const char*>{&data.train, "ftr"},
                          std::pair<Dataset*, const char*>{&data.test, "fte"}}) {
    ds->L = data.L;
    ds->schema_hash = schema_hash;
    ds->seed = seed;
    ds->experiment = "3";
    Rng rng(derive_seed(seed, std::string("experiment3 ") + tag));
    int k = 0;
    for (const auto& path : paths) {
      for (const auto& q : g.queries_on_path(path)) {
        std::string stem = tag + std::to_string(k);
        std::vector<std::string> fillers;
        std::map<std::string, std::vector<std::string>> pools;
        for (const auto& role : g.roles) {
          std::vector<std::string> candidates;
          for (int c = 0; c < kCandidatesPerRole; ++c) {
            auto id = stem + "." + role + "." + std::to_string(c);
            data.lexicon.add_word(id);
            candidates.push_back(id);
            fillers.push_back(id);
          }
          pools[role] = candidates;
        }
        // replay the walk along this fixed path, binding from the candidates
        Story story;
        story.path = path;
        for (int s : path) {
          for (const auto& tok : g.states[s].tokens) {
            if (!tok.is_role) {
              story.tokens.push_back(tok.text);
              continue;
            }
            auto bound = story.bindings.find(tok.text);
            if (bound == story.bindings.end()) {
              const auto& candidates = pools[tok.text];
              bound = story.bindings
                          .emplace(tok.text, candidates[rng.below(candidates.size())])
                          .first;
            }
            story.tokens.push_back(bound->second);
          }
        }
        Example ex = assemble_input(story, q, data.L, rng);
        ex.fillers = std::move(fillers);
        ds->examples.push_back(std::move(ex));
        ++k;
      }
    }
  }
  return data;
}

// ---- correlation-violation task -------------------------------------------

inline const std::vector<std::string>& correlation_template() {
  static const std::vector<std::string> frame = {"begin",    "subject", "sit",   "subject",
                                                 "friend",   "announce", "emcee", "perform",
                                                 "poet",     "consume", "dessert", "drink",
                                                 "goodbye"};
  return frame;
}

// The published shuffled order: a fixed rotation of the frame, not random.
inline std::vector<std::string> shuffle_story(const std::vector<std::string>& tmpl) {
  if (tmpl != correlation_template())
    throw DataError("shuffle_story: unexpected template");
  static const std::vector<std::string> shuffled = {"consume", "dessert", "drink",  "goodbye",
                                                    "begin",   "subject", "sit",    "subject",
                                                    "friend",  "announce", "emcee", "perform",
                                                    "poet"};
  return shuffled;
}

struct CorrelationConfig {
  int n_fillers = 1000;
  int allowed = 750;
  long n_train = 4000;
  long n_test = 1000;
  bool bias_even = false;   // +0.5 on even indices for 50% of fillers
  double bias_delta = 0.5;
};

struct CorrelationData {
  ExperimentData data;             // train/test over the fixed frame
  Dataset ambiguous;               // nonsense-only inputs, one per query
  Dataset shuffled;                // rotated frame test set
  std::vector<std::string> roles;  // Subject, Friend, Emcee, Poet
};

namespace detail {

// role slot positions inside a correlation frame
inline std::vector<std::pair<int, std::string>> corr_role_slots(const std::vector<std::string>& frame) {
  static const std::unordered_map<std::string, std::string> slot_role = {
      {"subject", "Subject"}, {"friend", "Friend"}, {"emcee", "Emcee"}, {"poet", "Poet"}};
  std::vector<std::pair<int, std::string>> slots;
  for (size_t i = 0; i < frame.size(); ++i) {
    auto it = slot_role.find(frame[i]);
    if (it != slot_role.end()) slots.emplace_back(static_cast<int>(i), it->second);
  }
  return slots;
}

inline Example corr_example(const std::vector<std::string>& frame,
                            const std::map<std::string, std::string>& bindings,
                            const std::string& query, int L, Rng& rng) {
  Story story;
  story.bindings = bindings;
  auto slots = corr_role_slots(frame);
  for (size_t i = 0; i < frame.size(); ++i) {
    bool replaced = false;
    for (const auto& [pos, role] : slots) {
      if (pos == static_cast<int>(i)) {
        story.tokens.push_back(bindings.at(role));
        replaced = true;
        break;
      }
    }
    if (!replaced) story.tokens.push_back(frame[i]);
  }
  return assemble_input(story, query, L, rng);
}

}  // namespace detail

// L-1 nonsense tokens followed by the query; no defined correct answer.
inline Dataset build_ambiguous_inputs(const std::vector<std::string>& queries, int L) {
  Dataset ds;
  ds.L = L;
  ds.experiment = "ambiguous";
  for (const auto& q : queries) {
    Example ex;
    ex.input.assign(static_cast<size_t>(L) - 1, kNonsenseWord);
    ex.input.push_back(q);
    ex.query = q;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

inline CorrelationData build_correlation_sets(const std::vector<std::string>& tmpl, uint64_t seed,
                                              const CorrelationConfig& cfg = {}) {
  if (tmpl != correlation_template())
    throw DataError("build_correlation_sets: unexpected template");
  if (cfg.allowed >= cfg.n_fillers)
    throw DataError("no exclusion: allowed must be smaller than the filler count");

  CorrelationData out;
  out.roles = {"Subject", "Friend", "Emcee", "Poet"};
  auto& data = out.data;
  int L = static_cast<int>(tmpl.size()) + 2;
  data.L = L;

  data.lexicon = Lexicon(seed, 50);
  std::unordered_set<std::string> slot_words = {"subject", "friend", "emcee", "poet"};
  for (const auto& w : tmpl)
    if (!slot_words.count(w)) {
      data.lexicon.add_word(w);
      data.fixed_words.push_back(w);
    }
  std::vector<std::string> queries = {"QSubject", "QFriend", "QEmcee", "QPoet"};
  for (const auto& q : queries) {
    data.lexicon.add_word(q);
    data.fixed_words.push_back(q);
  }
  data.lexicon.add_word(kNonsenseWord);
  data.fixed_words.push_back(kNonsenseWord);

  // Each filler is excluded from exactly one role; the exclusion assignment
  // and the biased 50% are independent seeded permutations.
  int n = cfg.n_fillers;
  std::vector<int> excluded_role(n);
  {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Rng r(derive_seed(seed, "correlation exclusion"));
    r.shuffle(perm);
    int per_role = n / 4;
    for (int i = 0; i < n; ++i) excluded_role[perm[i]] = std::min(i / per_role, 3);
  }
  std::vector<char> biased(n, 0);
  if (cfg.bias_even) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Rng r(derive_seed(seed, "correlation bias"));
    r.shuffle(perm);
    for (int i = 0; i < n / 2; ++i) biased[perm[i]] = 1;
  }
  std::vector<std::string> filler_ids(n);
  for (int i = 0; i < n; ++i) {
    filler_ids[i] = "cf" + std::to_string(i);
    data.lexicon.add_word(filler_ids[i]);
    if (biased[i])
      data.lexicon.set_embedding(filler_ids[i],
                                 bias_even_indices(data.lexicon.embedding(filler_ids[i]),
                                                   cfg.bias_delta));
    data.train_pool.push_back(filler_ids[i]);
  }

  std::vector<std::vector<int>> allowed_by_role(4), excluded_by_role(4);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < 4; ++r)
      (excluded_role[i] == r ? excluded_by_role : allowed_by_role)[r].push_back(i);
  }

  auto draw_set = [&](Dataset& ds, const std::vector<std::vector<int>>& source, long count,
                      const std::vector<std::string>& frame, const char* stream) {
    ds.L = L;
    ds.seed = seed;
    ds.schema_hash = "correlation";
    Rng rng(derive_seed(seed, stream));
    for (long i = 0; i < count; ++i) {
      std::map<std::string, std::string> bindings;
      std::unordered_set<int> used;
      for (int r = 0; r < 4; ++r) {
        const auto& pool = source[r];
        int pick;
        do {
          pick = pool[rng.below(pool.size())];
        } while (used.count(pick));
        used.insert(pick);
        bindings[out.roles[r]] = filler_ids[pick];
      }
      const auto& q = queries[rng.below(queries.size())];
      ds.examples.push_back(detail::corr_example(frame, bindings, q, L, rng));
    }
  };

  data.train.experiment = "corr-train";
  data.test.experiment = "corr-test";
  draw_set(data.train, allowed_by_role, cfg.n_train, tmpl, "correlation train");
  draw_set(data.test, excluded_by_role, cfg.n_test, tmpl, "correlation test");

  out.shuffled.experiment = "shuffled";
  draw_set(out.shuffled, allowed_by_role, cfg.n_test, shuffle_story(tmpl), "correlation shuffled");

  out.ambiguous = build_ambiguous_inputs(queries, L);
  out.ambiguous.seed = seed;
  out.ambiguous.schema_hash = "correlation";
  return out;
}

}  // namespace schemabind
