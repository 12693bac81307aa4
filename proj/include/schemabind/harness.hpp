#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "schemabind/adam.hpp"
#include "schemabind/checkpoint.hpp"
#include "schemabind/errors.hpp"
#include "schemabind/lexicon.hpp"
#include "schemabind/models.hpp"
#include "schemabind/storygen.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

// Training objective. Cross-entropy over cosine similarities to the batch
// corpus is the default: it shares the decoding rule used at evaluation.
// Plain MSE to the answer embedding is kept as an option.
enum class TrainLoss { CosineXent, Mse };

struct TrainConfig {
  std::string experiment;
  Arch arch = Arch::RnnLn;
  uint64_t seed = 0;
  double lr = 1e-4;
  int batch = 16;
  int val_batch = 4;
  long max_steps = 0;
  long eval_interval = 500;
  long checkpoint_interval = 0;  // 0 = final checkpoint only
  long eval_sample = 256;        // examples per split at interval evals; 0 = all
  double clip_norm = 10.0;
  TrainLoss loss = TrainLoss::CosineXent;
  double tau = 0.1;  // cosine logit temperature
  std::string out_dir;  // empty = no artifacts written
};

struct MetricRow {
  long step = 0;
  std::string split;
  double overall_acc = 0.0;
  double loss = 0.0;
  std::map<std::string, double> acc_by_query;
  std::map<std::string, long> n_by_query;
  long n = 0;
};

inline const std::vector<std::string>& metric_query_columns() {
  static const std::vector<std::string> cols = {"QSubject", "QFriend",  "QEmcee",
                                                "QPoet",    "QDessert", "QDrink"};
  return cols;
}

inline std::string metrics_csv_header() {
  std::string h = "step,split,arch,experiment,seed,overall_acc,loss";
  for (const auto& q : metric_query_columns()) h += ",acc_" + q;
  return h + "\n";
}

inline std::string metrics_csv_row(const MetricRow& row, Arch arch, const std::string& experiment,
                                   uint64_t seed) {
  std::string line = std::to_string(row.step) + "," + row.split + "," + arch_name(arch) + "," +
                     experiment + "," + std::to_string(seed) + "," + format_double(row.overall_acc) +
                     "," + format_double(row.loss);
  for (const auto& q : metric_query_columns()) {
    auto it = row.acc_by_query.find(q);
    line += ",";
    line += it == row.acc_by_query.end() ? "nan" : format_double(it->second);
  }
  return line + "\n";
}

struct EvalDetail {
  MetricRow row;
  std::vector<std::string> decoded;     // nearest corpus word per example
  std::vector<Tensor> predictions;      // raw 50-d outputs
  std::vector<std::string> answers;
  std::vector<std::string> queries;
};

namespace detail {

inline std::vector<size_t> eval_indices(size_t total, long cap, uint64_t seed, long step) {
  std::vector<size_t> idx(total);
  for (size_t i = 0; i < total; ++i) idx[i] = i;
  if (cap > 0 && static_cast<size_t>(cap) < total) {
    Rng rng(derive_seed(seed, "eval sample", static_cast<uint64_t>(step)));
    for (size_t i = 0; i < static_cast<size_t>(cap); ++i) {
      size_t j = i + static_cast<size_t>(rng.below(total - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<size_t>(cap));
  }
  return idx;
}

// Filler ids contributed by one example to its evaluation batch corpus.
inline void example_fillers(const Example& ex, std::vector<std::string>& out) {
  if (!ex.fillers.empty()) {
    out.insert(out.end(), ex.fillers.begin(), ex.fillers.end());
    return;
  }
  for (const auto& [role, filler] : ex.bindings) out.push_back(filler);
}

}  // namespace detail

// Exact-match accuracy via nearest-word decoding against the corpus of each
// validation batch (fixed words plus the training pool plus the batch's
// fillers), split out per query.
inline EvalDetail evaluate_detailed(const Model& model, const Dataset& ds,
                                    const ExperimentData& data, long step = 0,
                                    int val_batch = 4, long sample_cap = 0,
                                    bool keep_predictions = false) {
  if (ds.examples.empty()) throw DataError("evaluate: empty dataset");
  EvalDetail out;
  out.row.step = step;
  Tape tape;
  std::vector<std::string> fixed = data.fixed_words;
  fixed.insert(fixed.end(), data.train_pool.begin(), data.train_pool.end());

  auto indices = detail::eval_indices(ds.examples.size(), sample_cap, ds.seed, step);
  double loss_sum = 0.0;
  long correct = 0;
  for (size_t b = 0; b < indices.size(); b += static_cast<size_t>(val_batch)) {
    size_t end = std::min(indices.size(), b + static_cast<size_t>(val_batch));
    std::vector<std::string> batch_fillers;
    for (size_t i = b; i < end; ++i)
      detail::example_fillers(ds.examples[indices[i]], batch_fillers);
    Corpus corpus = build_corpus(data.lexicon, fixed, batch_fillers);
    if (corpus.size() < 2) throw DataError("evaluation corpus too small (size < 2)");
    for (size_t i = b; i < end; ++i) {
      const Example& ex = ds.examples[indices[i]];
      tape.reset();
      auto fwd = model.forward_sequence(tape, ex.input, data.lexicon);
      const auto& decoded = nearest_word(fwd.prediction.data, corpus);
      bool ok = !ex.answer.empty() && decoded == ex.answer;
      correct += ok;
      out.row.n += 1;
      out.row.n_by_query[ex.query] += 1;
      out.row.acc_by_query[ex.query] += ok;  // counts for now, averaged below
      if (!ex.answer.empty()) {
        const auto& target = data.lexicon.embedding(ex.answer);
        double l = 0.0;
        for (size_t j = 0; j < target.size(); ++j) {
          double d = fwd.prediction.data[j] - target[j];
          l += d * d;
        }
        loss_sum += l / static_cast<double>(target.size());
      }
      out.decoded.push_back(decoded);
      if (keep_predictions) out.predictions.push_back(fwd.prediction);
      out.answers.push_back(ex.answer);
      out.queries.push_back(ex.query);
    }
  }
  out.row.overall_acc = static_cast<double>(correct) / static_cast<double>(out.row.n);
  out.row.loss = loss_sum / static_cast<double>(out.row.n);
  for (auto& [q, acc] : out.row.acc_by_query) acc /= static_cast<double>(out.row.n_by_query[q]);
  return out;
}

inline MetricRow evaluate(const Model& model, const Dataset& ds, const ExperimentData& data,
                          long step = 0, int val_batch = 4, long sample_cap = 0) {
  return evaluate_detailed(model, ds, data, step, val_batch, sample_cap).row;
}

struct TrainResult {
  std::vector<MetricRow> metrics;
  std::string metrics_csv;
  double final_loss = 0.0;
};

// Minibatch gradient descent on the mean squared error to the answer
// embedding; per-example passes run on a small thread pool with gradients
// reduced in example order so results do not depend on scheduling.
inline TrainResult train(Model& model, ExperimentData& data, const TrainConfig& cfg) {
  if (data.train.examples.empty()) throw DataError("train: empty dataset");
  TrainResult result;
  result.metrics_csv = metrics_csv_header();

  size_t n_params = model.params().total_size();
  AdamState adam(n_params, cfg.lr);
  std::vector<double> params = model.params().flatten();
  Rng batch_rng(derive_seed(cfg.seed, "batch order"));

  int workers = std::min(2u, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<Tape> tapes(workers);
  std::vector<std::vector<double>> worker_grads(workers);
  std::vector<std::vector<double>> worker_loss(workers);
  std::vector<double> grads(n_params);

  auto emit_eval = [&](long step, long sample_cap) {
    MetricRow tr = evaluate(model, data.train, data, step, cfg.val_batch, sample_cap);
    tr.split = "train";
    MetricRow te = evaluate(model, data.test, data, step, cfg.val_batch, sample_cap);
    te.split = "test";
    for (auto& row : {tr, te}) {
      result.metrics.push_back(row);
      result.metrics_csv += metrics_csv_row(row, cfg.arch, cfg.experiment, cfg.seed);
    }
  };

  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  CheckpointMeta meta{cfg.experiment, 0, cfg.seed, data.train.schema_hash};
  if (!cfg.out_dir.empty() && cfg.max_steps == 0)
    save_checkpoint(cfg.out_dir + "/final.ckpt", model, &adam, meta);

  for (long step = 1; step <= cfg.max_steps; ++step) {
    std::vector<size_t> batch(static_cast<size_t>(cfg.batch));
    for (auto& i : batch) i = static_cast<size_t>(batch_rng.below(data.train.examples.size()));
    if (data.unlimited) {
      for (size_t i : batch)
        for (const auto& f : data.train.examples[i].fillers)
          data.lexicon.regenerate(f, static_cast<uint64_t>(step));
    }

    // batch corpus for the cross-entropy objective
    Tensor corpus_mat;
    std::vector<int> target_idx(batch.size(), -1);
    if (cfg.loss == TrainLoss::CosineXent) {
      std::vector<std::string> fixed = data.fixed_words;
      fixed.insert(fixed.end(), data.train_pool.begin(), data.train_pool.end());
      std::vector<std::string> batch_fillers;
      for (size_t i : batch) detail::example_fillers(data.train.examples[i], batch_fillers);
      Corpus corpus = build_corpus(data.lexicon, fixed, batch_fillers);
      corpus_mat = Tensor(static_cast<int>(corpus.size()), data.lexicon.dim());
      std::unordered_map<std::string, int> where;
      for (size_t i = 0; i < corpus.size(); ++i) {
        std::copy(corpus.embs[i].begin(), corpus.embs[i].end(),
                  corpus_mat.data.begin() + i * static_cast<size_t>(data.lexicon.dim()));
        where.emplace(corpus.ids[i], static_cast<int>(i));
      }
      for (size_t bi = 0; bi < batch.size(); ++bi)
        target_idx[bi] = where.at(data.train.examples[batch[bi]].answer);
    }

    auto run_worker = [&](int w) {
      auto& g = worker_grads[w];
      g.assign(n_params, 0.0);
      auto& losses = worker_loss[w];
      losses.clear();
      for (size_t bi = static_cast<size_t>(w); bi < batch.size(); bi += static_cast<size_t>(workers)) {
        const Example& ex = data.train.examples[batch[bi]];
        if (cfg.loss == TrainLoss::CosineXent) {
          losses.push_back(model.train_pass_xent(tapes[w], ex.input, data.lexicon, corpus_mat,
                                                 target_idx[bi], cfg.tau, g));
        } else {
          const auto& target = data.lexicon.embedding(ex.answer);
          losses.push_back(model.train_pass(tapes[w], ex.input, data.lexicon, target, g));
        }
      }
    };
    if (workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 1; w < workers; ++w) pool.emplace_back(run_worker, w);
      run_worker(0);
      for (auto& th : pool) th.join();
    }

    std::fill(grads.begin(), grads.end(), 0.0);
    double loss = 0.0;
    for (int w = 0; w < workers; ++w) {
      for (size_t k = 0; k < n_params; ++k) grads[k] += worker_grads[w][k];
      for (double l : worker_loss[w]) loss += l;
    }
    double inv_batch = 1.0 / static_cast<double>(cfg.batch);
    for (auto& g : grads) g *= inv_batch;
    loss *= inv_batch;
    result.final_loss = loss;

    if (!std::isfinite(loss)) {
      meta.step = step;
      if (!cfg.out_dir.empty())
        save_checkpoint(cfg.out_dir + "/diagnostic.ckpt", model, &adam, meta);
      throw NumericError("non-finite loss at step " + std::to_string(step) +
                         (cfg.out_dir.empty() ? "" : "; diagnostic checkpoint written"));
    }

    clip_global_norm(grads, cfg.clip_norm);
    adam_step(params, grads, adam);
    model.params().unflatten(params);

    bool last = step == cfg.max_steps;
    if ((cfg.eval_interval > 0 && step % cfg.eval_interval == 0) || last)
      emit_eval(step, last ? 0 : cfg.eval_sample);
    if (!cfg.out_dir.empty() &&
        ((cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0) || last)) {
      meta.step = step;
      save_checkpoint(last ? cfg.out_dir + "/final.ckpt"
                           : cfg.out_dir + "/step" + std::to_string(step) + ".ckpt",
                      model, &adam, meta);
    }
  }

  if (!cfg.out_dir.empty()) write_file(cfg.out_dir + "/metrics.csv", result.metrics_csv);
  return result;
}

// Accuracy on a correlation-violation style test set plus the raw predicted
// vectors (persisted when out_path is given) for the retention analysis.
inline EvalDetail run_correlation_eval(const Model& model, const Dataset& test_set,
                                       const ExperimentData& data,
                                       const std::string& out_path = "") {
  EvalDetail detail = evaluate_detailed(model, test_set, data, 0, 4, 0, true);
  if (!out_path.empty()) {
    std::string dump = "query,answer,decoded,prediction\n";
    for (size_t i = 0; i < detail.predictions.size(); ++i) {
      dump += detail.queries[i] + "," + detail.answers[i] + "," + detail.decoded[i] + ",";
      for (int j = 0; j < detail.predictions[i].size(); ++j) {
        if (j) dump += ';';
        dump += format_double(detail.predictions[i][j]);
      }
      dump += "\n";
    }
    write_file(out_path, dump);
  }
  return detail;
}

// Raw predictions for inputs with no defined answer (ambiguous probes).
inline std::vector<Tensor> predict_raw(const Model& model, const Dataset& ds,
                                       const Lexicon& lex) {
  Tape tape;
  std::vector<Tensor> out;
  for (const auto& ex : ds.examples) {
    tape.reset();
    out.push_back(model.forward_sequence(tape, ex.input, lex).prediction);
  }
  return out;
}

}  // namespace schemabind
