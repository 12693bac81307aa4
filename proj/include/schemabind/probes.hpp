#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/harness.hpp"
#include "schemabind/lexicon.hpp"
#include "schemabind/models.hpp"
#include "schemabind/stats.hpp"
#include "schemabind/storygen.hpp"

namespace schemabind {

// Closed-form ridge regression, intercept unpenalized via column centering.
// For wide feature matrices the equivalent dual form keeps the solve at n x n.
struct RidgeMap {
  Tensor w;  // d x k
  std::vector<double> intercept;

  std::vector<double> predict(const std::vector<double>& x) const {
    std::vector<double> y(intercept);
    for (int j = 0; j < w.cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < w.rows; ++i) s += x[static_cast<size_t>(i)] * w.at(i, j);
      y[static_cast<size_t>(j)] += s;
    }
    return y;
  }
};

inline RidgeMap ridge_fit(const Tensor& x, const Tensor& y, double alpha = 1.0) {
  if (x.rows != y.rows) throw DimensionError("ridge_fit: row counts disagree");
  if (x.rows < 1 || alpha < 0.0) throw DataError("ridge_fit: need rows >= 1 and alpha >= 0");
  if (!x.all_finite() || !y.all_finite()) throw NumericError("ridge_fit: non-finite inputs");
  int n = x.rows, d = x.cols, k = y.cols;

  using Mat = Eigen::MatrixXd;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      x.data.data(), n, d);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Y(
      y.data.data(), n, k);
  Eigen::RowVectorXd mx = X.colwise().mean();
  Eigen::RowVectorXd my = Y.colwise().mean();
  Mat Xc = X.rowwise() - mx;
  Mat Yc = Y.rowwise() - my;

  Mat W;
  if (d <= n) {
    Mat gram = Xc.transpose() * Xc;
    gram.diagonal().array() += alpha;
    W = gram.ldlt().solve(Xc.transpose() * Yc);
  } else {
    Mat gram = Xc * Xc.transpose();
    gram.diagonal().array() += alpha;
    W = Xc.transpose() * gram.ldlt().solve(Yc);
  }

  RidgeMap map;
  map.w = Tensor(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) map.w.at(i, j) = W(i, j);
  Eigen::RowVectorXd b = my - mx * W;
  map.intercept.assign(b.data(), b.data() + k);
  return map;
}

// 100 sequences over one fixed story frame with fresh fillers per sequence;
// snapshots of the hidden state and (when present) the external memory after
// every input token.
struct ActivationDataset {
  std::vector<std::vector<Tensor>> hidden;    // [seq][t], 50-d
  std::vector<std::vector<Tensor>> external;  // [seq][t], flattened; empty without external memory
  std::vector<std::map<std::string, std::string>> bindings;  // per sequence
  std::vector<std::string> roles;  // roles present on the frame
  Lexicon lexicon;
  std::vector<std::string> fixed_words;
  std::vector<std::vector<std::string>> fillers;  // per sequence candidate ids
  int L = 0;

  ActivationDataset() : lexicon(0, 1) {}
};

// The frame is the longest schema path so every role is present. Queries
// rotate round-robin so no single query dominates the final timestep.
inline ActivationDataset collect_activations(const Model& model, const SchemaGraph& g,
                                             uint64_t seed, int n = 100) {
  Arch arch = model.config().arch;
  unsigned mask = kProbeHidden;
  if (arch == Arch::FastWeights) mask |= kProbeFastWeights;
  if (arch == Arch::ReducedNtm) mask |= kProbeMemory;

  std::vector<int> frame_path;
  int best = -1;
  for (const auto& p : g.enumerate_paths()) {
    int tokens = g.path_token_count(p);
    if (tokens > best) {
      best = tokens;
      frame_path = p;
    }
  }

  ActivationDataset ds;
  ds.L = g.input_length();
  ds.lexicon = detail::base_lexicon(g, seed, &ds.fixed_words);
  ds.roles = g.roles_on_path(frame_path);

  Rng rng(derive_seed(seed, "collect_activations"));
  Tape tape;
  for (int i = 0; i < n; ++i) {
    std::string stem = "probe" + std::to_string(i);
    std::map<std::string, std::vector<std::string>> pools;
    std::vector<std::string> fillers;
    for (const auto& role : g.roles) {
      std::vector<std::string> candidates;
      for (int c = 0; c < 2; ++c) {
        auto id = stem + "." + role + "." + std::to_string(c);
        ds.lexicon.add_word(id);
        candidates.push_back(id);
        fillers.push_back(id);
      }
      pools[role] = candidates;
    }
    Story story;
    story.path = frame_path;
    for (int s : frame_path) {
      for (const auto& tok : g.states[s].tokens) {
        if (!tok.is_role) {
          story.tokens.push_back(tok.text);
          continue;
        }
        auto bound = story.bindings.find(tok.text);
        if (bound == story.bindings.end())
          bound = story.bindings.emplace(tok.text, pools[tok.text][rng.below(2)]).first;
        story.tokens.push_back(bound->second);
      }
    }
    const auto& q = g.queries[static_cast<size_t>(i) % g.queries.size()];
    std::vector<std::string> input = story.tokens;
    while (static_cast<int>(input.size()) < ds.L - 1) input.push_back(kNonsenseWord);
    input.push_back(q);

    tape.reset();
    auto fwd = model.forward_sequence(tape, input, ds.lexicon, mask);
    ds.hidden.push_back(std::move(fwd.trace.hidden));
    if (arch == Arch::FastWeights) ds.external.push_back(std::move(fwd.trace.fast_weights));
    if (arch == Arch::ReducedNtm) ds.external.push_back(std::move(fwd.trace.memory));
    ds.bindings.push_back(story.bindings);
    ds.fillers.push_back(std::move(fillers));
  }
  return ds;
}

struct RankingCurve {
  std::string source;  // "hidden" or "external"
  std::string role;
  std::vector<double> mean_score;  // one entry per timestep
};

// Per (source, role, timestep): ridge fit on 80 sequences, ranking scores on
// the held-out 20 against the evaluation corpus of those 20 sequences.
inline std::vector<RankingCurve> decode_timecourse(const ActivationDataset& ds,
                                                   uint64_t split_seed, double alpha = 1.0,
                                                   int n_train = 80, bool shuffle_labels = false) {
  int n = static_cast<int>(ds.hidden.size());
  if (n_train >= n) throw DataError("decode_timecourse: split leaves no test sequences");
  int L = static_cast<int>(ds.hidden[0].size());

  std::vector<size_t> order(static_cast<size_t>(n));
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(split_seed, "decode split"));
  rng.shuffle(order);
  std::vector<size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<size_t> test_idx(order.begin() + n_train, order.end());

  // label permutation control: destroy the activation/filler pairing
  std::vector<size_t> label_of(static_cast<size_t>(n));
  for (size_t i = 0; i < label_of.size(); ++i) label_of[i] = i;
  if (shuffle_labels) {
    Rng lrng(derive_seed(split_seed, "decode label shuffle"));
    lrng.shuffle(label_of);
  }

  std::vector<std::string> corpus_fillers;
  for (size_t i : test_idx)
    corpus_fillers.insert(corpus_fillers.end(), ds.fillers[i].begin(), ds.fillers[i].end());
  Corpus corpus = build_corpus(ds.lexicon, ds.fixed_words, corpus_fillers);

  std::vector<RankingCurve> curves;
  std::vector<std::pair<std::string, const std::vector<std::vector<Tensor>>*>> sources;
  sources.emplace_back("hidden", &ds.hidden);
  if (!ds.external.empty()) sources.emplace_back("external", &ds.external);

  for (const auto& [source_name, feats] : sources) {
    int dim = (*feats)[0][0].size();
    for (const auto& role : ds.roles) {
      RankingCurve curve;
      curve.source = source_name;
      curve.role = role;
      curve.mean_score.resize(static_cast<size_t>(L));
      Tensor xtr(n_train, dim), ytr(n_train, ds.lexicon.dim());
      for (int t = 0; t < L; ++t) {
        for (int r = 0; r < n_train; ++r) {
          const auto& f = (*feats)[train_idx[static_cast<size_t>(r)]][static_cast<size_t>(t)];
          std::copy(f.data.begin(), f.data.end(), xtr.data.begin() + static_cast<size_t>(r) * dim);
          const auto& target = ds.lexicon.embedding(
              ds.bindings[label_of[train_idx[static_cast<size_t>(r)]]].at(role));
          std::copy(target.begin(), target.end(),
                    ytr.data.begin() + static_cast<size_t>(r) * ds.lexicon.dim());
        }
        RidgeMap map = ridge_fit(xtr, ytr, alpha);
        double sum = 0.0;
        for (size_t i : test_idx) {
          auto pred = map.predict((*feats)[i][static_cast<size_t>(t)].data);
          sum += ranking_score(pred, ds.bindings[label_of[i]].at(role), corpus);
        }
        curve.mean_score[static_cast<size_t>(t)] = sum / static_cast<double>(test_idx.size());
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

// Histograms of strongest write/read slots and the role-vs-query Pearson
// matrix over a set of traced sequences.
struct WeightStats {
  std::vector<std::string> roles;                      // label order
  std::map<std::string, std::vector<long>> write_hist;  // role -> slot counts
  std::map<std::string, std::vector<long>> read_hist;   // query role -> slot counts
  Tensor pearson;  // [query role][written role]
};

inline WeightStats weight_stats(const std::vector<std::pair<const Example*, Trace>>& traced,
                                const std::vector<std::string>& roles,
                                const std::vector<std::string>& queries, int slots) {
  if (traced.empty()) throw DataError("weight_stats: no traces");
  WeightStats stats;
  stats.roles = roles;
  for (const auto& r : roles) {
    stats.write_hist[r].assign(static_cast<size_t>(slots), 0);
    stats.read_hist[r].assign(static_cast<size_t>(slots), 0);
  }
  auto argmax = [](const Tensor& w) {
    int best = 0;
    for (int i = 1; i < w.size(); ++i)
      if (w[i] > w[best]) best = i;
    return best;
  };
  for (const auto& [ex, trace] : traced) {
    if (trace.write_weights.empty() || trace.read_weights.empty())
      throw DataError("weight_stats: traces are missing read/write weightings");
    for (const auto& [role, filler] : ex->bindings) {
      if (!stats.write_hist.count(role)) continue;
      for (size_t t = 0; t < ex->input.size(); ++t)
        if (ex->input[t] == filler)
          stats.write_hist[role][static_cast<size_t>(argmax(trace.write_weights[t]))] += 1;
    }
    auto role = SchemaGraph::role_of_query(ex->query);
    if (stats.read_hist.count(role)) {
      size_t t = ex->input.size() - 1;  // query timestep
      for (const auto& w : trace.read_weights[t])
        stats.read_hist[role][static_cast<size_t>(argmax(w))] += 1;
    }
  }
  (void)queries;
  int nr = static_cast<int>(roles.size());
  stats.pearson = Tensor(nr, nr);
  for (int qi = 0; qi < nr; ++qi) {
    std::vector<double> read(stats.read_hist[roles[static_cast<size_t>(qi)]].begin(),
                             stats.read_hist[roles[static_cast<size_t>(qi)]].end());
    for (int rj = 0; rj < nr; ++rj) {
      std::vector<double> write(stats.write_hist[roles[static_cast<size_t>(rj)]].begin(),
                                stats.write_hist[roles[static_cast<size_t>(rj)]].end());
      stats.pearson.at(qi, rj) = pearson(read, write);
    }
  }
  return stats;
}

// Per predicted vector: Welch t between even and odd indices. Per setting:
// one-sample t of those statistics against zero.
struct EvenOddResult {
  std::vector<double> t_stats;
  TTest overall;
};

inline EvenOddResult even_odd_ttest(const std::vector<Tensor>& predictions) {
  EvenOddResult out;
  for (const auto& p : predictions) {
    std::vector<double> even, odd;
    for (int i = 0; i < p.size(); ++i) (i % 2 == 0 ? even : odd).push_back(p[i]);
    if (even.size() < 2 || odd.size() < 2)
      throw DataError("even_odd_ttest: fewer than 2 indices per group");
    out.t_stats.push_back(welch_t(even, odd));
  }
  out.overall = one_sample_t(out.t_stats, 0.0);
  return out;
}

}  // namespace schemabind
