#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "schemabind/errors.hpp"
#include "schemabind/lexicon.hpp"
#include "schemabind/rng.hpp"
#include "schemabind/tape.hpp"
#include "schemabind/tensor.hpp"

namespace schemabind {

enum class Arch { RnnLn, LstmLn, FastWeights, ReducedNtm };

inline const char* arch_name(Arch a) {
  switch (a) {
    case Arch::RnnLn: return "rnn";
    case Arch::LstmLn: return "lstm";
    case Arch::FastWeights: return "fw";
    case Arch::ReducedNtm: return "ntm";
  }
  return "?";
}

inline Arch arch_from_name(const std::string& s) {
  if (s == "rnn") return Arch::RnnLn;
  if (s == "lstm") return Arch::LstmLn;
  if (s == "fw") return Arch::FastWeights;
  if (s == "ntm") return Arch::ReducedNtm;
  throw DataError("unknown architecture: " + s);
}

struct CellConfig {
  Arch arch = Arch::RnnLn;
  int input_dim = 50;
  int hidden = 50;
  int output_dim = 50;
  struct {
    int slots = 128;
    int word = 20;
    int write_heads = 1;
    int read_heads = 4;
  } ntm;
  struct {
    double lambda = 0.95;
    double eta = 0.5;
    int inner_steps = 1;
  } fw;
  double mem_init_sigma = 0.0;  // 0: constant 1e-6 memory; >0: fixed seeded N(0, sigma) rows
  double ln_eps = 1e-5;
};

// Ordered, named parameter tensors with a flat view for the optimizer.
class ParamSet {
 public:
  size_t add(const std::string& name, int r, int c) {
    items.emplace_back(name, Tensor(r, c));
    return items.size() - 1;
  }

  Tensor& tensor(size_t i) { return items[i].second; }
  const Tensor& tensor(size_t i) const { return items[i].second; }

  Tensor* find(const std::string& name) {
    for (auto& [n, t] : items)
      if (n == name) return &t;
    return nullptr;
  }

  size_t total_size() const {
    size_t n = 0;
    for (const auto& [name, t] : items) n += t.data.size();
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(total_size());
    for (const auto& [name, t] : items) flat.insert(flat.end(), t.data.begin(), t.data.end());
    return flat;
  }

  void unflatten(const std::vector<double>& flat) {
    size_t off = 0;
    for (auto& [name, t] : items) {
      std::copy(flat.begin() + off, flat.begin() + off + t.data.size(), t.data.begin());
      off += t.data.size();
    }
  }

  std::vector<std::pair<std::string, Tensor>> items;
};

// Per-timestep snapshots selected by a probe mask.
enum : unsigned {
  kProbeNone = 0,
  kProbeHidden = 1u << 0,
  kProbeFastWeights = 1u << 1,
  kProbeMemory = 1u << 2,
  kProbeReadWeights = 1u << 3,
  kProbeWriteWeights = 1u << 4,
};

struct Trace {
  std::vector<Tensor> hidden;
  std::vector<Tensor> fast_weights;
  std::vector<Tensor> memory;
  std::vector<std::vector<Tensor>> read_weights;  // [timestep][head]
  std::vector<Tensor> write_weights;
};

struct ForwardResult {
  Tensor prediction;
  Trace trace;
  NodeId prediction_node = -1;
};

// One recurrent network (parameters plus architecture) behind a shared
// step/readout contract across all four cell types.
class Model {
 public:
  Model(const CellConfig& cfg, uint64_t seed) : cfg_(cfg) {
    if (const char* env = std::getenv("SB_MEM_INIT")) cfg_.mem_init_sigma = std::atof(env);
    build_params();
    init_params(seed);
    if (cfg_.mem_init_sigma > 0.0) {
      Rng mr(derive_seed(seed, "memory init"));
      mem_init_ = Tensor::randn(cfg_.ntm.slots, cfg_.ntm.word, mr, cfg_.mem_init_sigma);
    }
  }

  const CellConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  struct Pass {
    Tape* tape = nullptr;
    std::vector<NodeId> p;  // aligned with params().items
    NodeId hidden = -1, cell = -1, fast_weights = -1, memory = -1;
    std::vector<NodeId> reads;
    std::vector<NodeId> head_weights;  // write head first, then read heads
  };

  Pass begin_pass(Tape& tape) const {
    Pass pass;
    pass.tape = &tape;
    pass.p.reserve(params_.items.size());
    for (const auto& [name, t] : params_.items) pass.p.push_back(tape.leaf(t));
    int h = cfg_.hidden;
    pass.hidden = tape.leaf_fill(h, 1, 0.0);
    if (cfg_.arch == Arch::LstmLn || cfg_.arch == Arch::ReducedNtm)
      pass.cell = tape.leaf_fill(h, 1, 0.0);
    if (cfg_.arch == Arch::FastWeights) pass.fast_weights = tape.leaf_fill(h, h, 0.0);
    if (cfg_.arch == Arch::ReducedNtm) {
      pass.memory = cfg_.mem_init_sigma > 0.0 ? tape.leaf(mem_init_)
                                              : tape.leaf_fill(cfg_.ntm.slots, cfg_.ntm.word, 1e-6);
      int heads = cfg_.ntm.write_heads + cfg_.ntm.read_heads;
      for (int j = 0; j < heads; ++j) {
        NodeId logits = tape.slice_rows(pass.p[i_init_w_], j * cfg_.ntm.slots, cfg_.ntm.slots);
        pass.head_weights.push_back(tape.softmax(logits));
      }
      for (int j = 0; j < cfg_.ntm.read_heads; ++j)
        pass.reads.push_back(tape.slice_rows(pass.p[i_init_r_], j * cfg_.ntm.word, cfg_.ntm.word));
    }
    return pass;
  }

  void step(Pass& pass, NodeId x) const {
    switch (cfg_.arch) {
      case Arch::RnnLn: step_rnn(pass, x); break;
      case Arch::LstmLn: step_lstm(pass, x); break;
      case Arch::FastWeights: step_fw(pass, x); break;
      case Arch::ReducedNtm: step_ntm(pass, x); break;
    }
  }

  NodeId readout(Pass& pass) const {
    Tape& t = *pass.tape;
    NodeId feat = pass.hidden;
    if (cfg_.arch == Arch::ReducedNtm) {
      std::vector<NodeId> parts{pass.hidden};
      parts.insert(parts.end(), pass.reads.begin(), pass.reads.end());
      feat = t.concat(parts);
    }
    return t.add(t.matmul(pass.p[i_wo_], feat), pass.p[i_bo_]);
  }

  ForwardResult forward_sequence(Tape& tape, const std::vector<std::string>& tokens,
                                 const Lexicon& lex, unsigned probe_mask = kProbeNone) const {
    if ((probe_mask & kProbeFastWeights) && cfg_.arch != Arch::FastWeights)
      throw DataError("probe source fast_weights is absent for this architecture");
    if ((probe_mask & (kProbeMemory | kProbeReadWeights | kProbeWriteWeights)) &&
        cfg_.arch != Arch::ReducedNtm)
      throw DataError("probe source memory/weights is absent for this architecture");
    Pass pass = begin_pass(tape);
    ForwardResult result;
    for (const auto& tok : tokens) {
      NodeId x = tape.leaf(Tensor::column(lex.embedding(tok)));
      step(pass, x);
      if (probe_mask & kProbeHidden) result.trace.hidden.push_back(tape.value_tensor(pass.hidden));
      if (probe_mask & kProbeFastWeights)
        result.trace.fast_weights.push_back(tape.value_tensor(pass.fast_weights));
      if (probe_mask & kProbeMemory) result.trace.memory.push_back(tape.value_tensor(pass.memory));
      if (probe_mask & kProbeWriteWeights)
        result.trace.write_weights.push_back(tape.value_tensor(pass.head_weights[0]));
      if (probe_mask & kProbeReadWeights) {
        std::vector<Tensor> reads;
        for (int j = 0; j < cfg_.ntm.read_heads; ++j)
          reads.push_back(tape.value_tensor(pass.head_weights[cfg_.ntm.write_heads + j]));
        result.trace.read_weights.push_back(std::move(reads));
      }
    }
    result.prediction_node = readout(pass);
    result.prediction = tape.value_tensor(result.prediction_node);
    return result;
  }

  // Forward + MSE loss + backward; parameter gradients are accumulated into
  // grad_out (flat, aligned with params). Returns the loss value.
  double train_pass(Tape& tape, const std::vector<std::string>& tokens, const Lexicon& lex,
                    const Embedding& target, std::vector<double>& grad_out) const {
    tape.reset();
    auto fwd = forward_sequence(tape, tokens, lex);
    NodeId tgt = tape.leaf(Tensor::column(target));
    NodeId diff = tape.sub(fwd.prediction_node, tgt);
    NodeId loss = tape.scale(tape.dot_(diff, diff), 1.0 / cfg_.output_dim);
    return finish_pass(tape, loss, grad_out);
  }

  // Forward + cosine cross-entropy against a corpus matrix (one embedding per
  // row) + backward. The target is the answer's row index.
  double train_pass_xent(Tape& tape, const std::vector<std::string>& tokens, const Lexicon& lex,
                         const Tensor& corpus_mat, int target_index, double tau,
                         std::vector<double>& grad_out) const {
    tape.reset();
    auto fwd = forward_sequence(tape, tokens, lex);
    NodeId cos = tape.cosine_rows(tape.leaf(corpus_mat), fwd.prediction_node);
    NodeId loss = tape.softmax_xent(tape.scale(cos, 1.0 / tau), target_index);
    return finish_pass(tape, loss, grad_out);
  }

 private:
  // Param leaves are the first nodes on the tape, in params order.
  static NodeId pass_param_id(size_t index) { return static_cast<NodeId>(index); }

  double finish_pass(Tape& tape, NodeId loss, std::vector<double>& grad_out) const {
    double loss_value = tape.value(loss)[0];
    tape.backward(loss);
    size_t off = 0;
    size_t pi = 0;
    for (const auto& [name, t] : params_.items) {
      const double* g = tape.grad(pass_param_id(pi));
      for (size_t k = 0; k < t.data.size(); ++k) grad_out[off + k] += g[k];
      off += t.data.size();
      ++pi;
    }
    return loss_value;
  }

  void build_params() {
    int h = cfg_.hidden, in = cfg_.input_dim, out = cfg_.output_dim;
    switch (cfg_.arch) {
      case Arch::RnnLn:
        i_wx_ = params_.add("wx", h, in);
        i_wh_ = params_.add("wh", h, h);
        i_b_ = params_.add("b", h, 1);
        i_ln_g_ = params_.add("ln_gain", h, 1);
        i_ln_b_ = params_.add("ln_bias", h, 1);
        break;
      case Arch::LstmLn:
        i_wx_ = params_.add("wx", 4 * h, in);
        i_wh_ = params_.add("wh", 4 * h, h);
        i_b_ = params_.add("b", 4 * h, 1);
        i_ln_g_ = params_.add("ln_gain", 4 * h, 1);
        i_ln_b_ = params_.add("ln_bias", 4 * h, 1);
        break;
      case Arch::FastWeights:
        i_wx_ = params_.add("c", h, in);
        i_wh_ = params_.add("w", h, h);
        i_b_ = params_.add("b", h, 1);
        i_ln_g_ = params_.add("ln_gain", h, 1);
        i_ln_b_ = params_.add("ln_bias", h, 1);
        break;
      case Arch::ReducedNtm: {
        int ctrl_in = in + cfg_.ntm.read_heads * cfg_.ntm.word;
        i_wx_ = params_.add("ctrl_wx", 4 * h, ctrl_in);
        i_wh_ = params_.add("ctrl_wh", 4 * h, h);
        i_b_ = params_.add("ctrl_b", 4 * h, 1);
        i_ln_g_ = params_.add("ctrl_ln_gain", 4 * h, 1);
        i_ln_b_ = params_.add("ctrl_ln_bias", 4 * h, 1);
        int heads = cfg_.ntm.write_heads + cfg_.ntm.read_heads;
        int head_out = heads * (cfg_.ntm.word + 3) + cfg_.ntm.write_heads * 2 * cfg_.ntm.word;
        i_whead_ = params_.add("head_w", head_out, h);
        i_bhead_ = params_.add("head_b", head_out, 1);
        i_init_w_ = params_.add("init_weight_logits", heads * cfg_.ntm.slots, 1);
        i_init_r_ = params_.add("init_reads", cfg_.ntm.read_heads * cfg_.ntm.word, 1);
        break;
      }
    }
    int ro_in = cfg_.arch == Arch::ReducedNtm ? h + cfg_.ntm.read_heads * cfg_.ntm.word : h;
    i_wo_ = params_.add("readout_w", out, ro_in);
    i_bo_ = params_.add("readout_b", out, 1);
  }

  void init_params(uint64_t seed) {
    Rng rng(derive_seed(seed, "model init"));
    double in_gain = std::getenv("SB_IN_GAIN") ? std::atof(std::getenv("SB_IN_GAIN")) : 1.0;
    double ro_gain = std::getenv("SB_RO_GAIN") ? std::atof(std::getenv("SB_RO_GAIN")) : 1.0;
    for (auto& [name, t] : params_.items) {
      if (name == "ln_gain" || name == "ctrl_ln_gain") {
        std::fill(t.data.begin(), t.data.end(), 1.0);
      } else if (name == "init_weight_logits") {
        // distinct slot preferences at t=0; identical rows plus uniform
        // weightings would keep every memory slot permanently interchangeable
        for (auto& x : t.data) x = rng.normal();
      } else if (name == "b" || name == "ctrl_b") {
        std::fill(t.data.begin(), t.data.end(), 0.0);
        if (cfg_.arch == Arch::LstmLn || cfg_.arch == Arch::ReducedNtm)
          for (int i = cfg_.hidden; i < 2 * cfg_.hidden; ++i) t.data[i] = 1.0;  // forget gate
      } else if (t.cols == 1) {
        std::fill(t.data.begin(), t.data.end(), 0.0);
      } else {
        double stddev = 1.0 / std::sqrt(static_cast<double>(t.cols));
        if (name == "wx" || name == "c" || name == "ctrl_wx") stddev *= in_gain;
        if (name == "readout_w") stddev *= ro_gain;
        for (auto& x : t.data) x = stddev * rng.normal();
      }
    }
  }

  void step_rnn(Pass& pass, NodeId x) const {
    Tape& t = *pass.tape;
    NodeId z = t.add(t.add(t.matmul(pass.p[i_wh_], pass.hidden), t.matmul(pass.p[i_wx_], x)),
                     pass.p[i_b_]);
    pass.hidden = t.tanh_(t.layer_norm(z, pass.p[i_ln_g_], pass.p[i_ln_b_], cfg_.ln_eps));
  }

  // Shared by the LSTM cell and the NTM controller: layer norm per gate
  // pre-activation, forget bias folded into b.
  void lstm_core(Pass& pass, NodeId x, NodeId& hidden, NodeId& cell) const {
    Tape& t = *pass.tape;
    int h = cfg_.hidden;
    NodeId z = t.add(t.add(t.matmul(pass.p[i_wx_], x), t.matmul(pass.p[i_wh_], hidden)),
                     pass.p[i_b_]);
    NodeId gates[4];
    for (int k = 0; k < 4; ++k) {
      NodeId zk = t.slice_rows(z, k * h, h);
      NodeId gk = t.slice_rows(pass.p[i_ln_g_], k * h, h);
      NodeId bk = t.slice_rows(pass.p[i_ln_b_], k * h, h);
      gates[k] = t.layer_norm(zk, gk, bk, cfg_.ln_eps);
    }
    NodeId ig = t.sigmoid_(gates[0]);
    NodeId fg = t.sigmoid_(gates[1]);
    NodeId gg = t.tanh_(gates[2]);
    NodeId og = t.sigmoid_(gates[3]);
    cell = t.add(t.hadamard(fg, cell), t.hadamard(ig, gg));
    hidden = t.hadamard(og, t.tanh_(cell));
  }

  void step_lstm(Pass& pass, NodeId x) const { lstm_core(pass, x, pass.hidden, pass.cell); }

  void step_fw(Pass& pass, NodeId x) const {
    Tape& t = *pass.tape;
    NodeId pre = t.add(t.add(t.matmul(pass.p[i_wh_], pass.hidden), t.matmul(pass.p[i_wx_], x)),
                       pass.p[i_b_]);
    NodeId h0 = t.tanh_(t.layer_norm(pre, pass.p[i_ln_g_], pass.p[i_ln_b_], cfg_.ln_eps));
    NodeId hebb = t.scale(t.outer(pass.hidden, pass.hidden), cfg_.fw.eta);
    NodeId fast = t.add(t.scale(pass.fast_weights, cfg_.fw.lambda), hebb);
    NodeId hs = h0;
    for (int s = 0; s < cfg_.fw.inner_steps; ++s) {
      NodeId inner = t.add(pre, t.matmul(fast, hs));
      hs = t.tanh_(t.layer_norm(inner, pass.p[i_ln_g_], pass.p[i_ln_b_], cfg_.ln_eps));
    }
    pass.fast_weights = fast;
    pass.hidden = hs;
  }

  void step_ntm(Pass& pass, NodeId x) const {
    Tape& t = *pass.tape;
    const auto& n = cfg_.ntm;
    std::vector<NodeId> parts{x};
    parts.insert(parts.end(), pass.reads.begin(), pass.reads.end());
    NodeId inp = t.concat(parts);
    lstm_core(pass, inp, pass.hidden, pass.cell);

    NodeId head_out = t.add(t.matmul(pass.p[i_whead_], pass.hidden), pass.p[i_bhead_]);
    int heads = n.write_heads + n.read_heads;
    int off = 0;
    std::vector<NodeId> new_weights(heads);
    NodeId memory = pass.memory;
    // addressing for every head is computed against the pre-write memory
    for (int j = 0; j < heads; ++j) {
      NodeId key = t.slice_rows(head_out, off, n.word);
      NodeId beta = t.softplus(t.slice_rows(head_out, off + n.word, 1));
      NodeId gate = t.sigmoid_(t.slice_rows(head_out, off + n.word + 1, 1));
      NodeId gamma = t.scale(t.softplus(t.slice_rows(head_out, off + n.word + 2, 1)), 1.0, 1.0);
      off += n.word + 3;
      NodeId content = t.softmax(t.scalar_mul(t.cosine_rows(memory, key), beta));
      NodeId blended = t.add(t.scalar_mul(content, gate),
                             t.scalar_mul(pass.head_weights[j], t.one_minus(gate)));
      new_weights[j] = t.sharpen(blended, gamma);
    }
    // write, then read from the updated memory
    for (int j = 0; j < n.write_heads; ++j) {
      NodeId erase = t.sigmoid_(t.slice_rows(head_out, off, n.word));
      NodeId addv = t.tanh_(t.slice_rows(head_out, off + n.word, n.word));
      off += 2 * n.word;
      NodeId keep = t.sub(memory, t.hadamard(memory, t.outer(new_weights[j], erase)));
      memory = t.add(keep, t.outer(new_weights[j], addv));
    }
    for (int j = 0; j < n.read_heads; ++j)
      pass.reads[j] = t.matmul(memory, new_weights[n.write_heads + j], /*ta=*/true);
    pass.memory = memory;
    pass.head_weights = std::move(new_weights);
  }

  CellConfig cfg_;
  ParamSet params_;
  Tensor mem_init_;
  size_t i_wx_ = 0, i_wh_ = 0, i_b_ = 0, i_ln_g_ = 0, i_ln_b_ = 0;
  size_t i_whead_ = 0, i_bhead_ = 0, i_init_w_ = 0, i_init_r_ = 0;
  size_t i_wo_ = 0, i_bo_ = 0;
};

}  // namespace schemabind
