// quick manual FD probe over each op and each cell before the real suites
#include "schemabind/models.hpp"
#include "fdcheck.hpp"
#include <cstdio>

using namespace schemabind;

// generic: build graph from flat params via builder(tape, leaves...) -> scalar loss node
double check_op(const char* name,
                const std::vector<std::pair<int,int>>& shapes,
                const std::function<NodeId(Tape&, const std::vector<NodeId>&)>& build,
                uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Tensor> inputs;
  size_t total = 0;
  for (auto [r, c] : shapes) { inputs.push_back(Tensor::randn(r, c, rng)); total += (size_t)r * c; }
  auto flatten = [&]() { std::vector<double> f; for (auto& t : inputs) f.insert(f.end(), t.data.begin(), t.data.end()); return f; };
  auto run = [&](const std::vector<double>& flat) {
    size_t off = 0; std::vector<Tensor> local = inputs;
    for (auto& t : local) { std::copy(flat.begin()+off, flat.begin()+off+t.data.size(), t.data.begin()); off += t.data.size(); }
    Tape tape; std::vector<NodeId> ids;
    for (auto& t : local) ids.push_back(tape.leaf(t));
    NodeId loss = build(tape, ids);
    return tape.value(loss)[0];
  };
  // analytic
  Tape tape; std::vector<NodeId> ids;
  for (auto& t : inputs) ids.push_back(tape.leaf(t));
  NodeId loss = build(tape, ids);
  tape.backward(loss);
  std::vector<double> analytic;
  for (size_t i = 0; i < ids.size(); ++i) {
    const double* g = tape.grad(ids[i]);
    analytic.insert(analytic.end(), g, g + tape.size(ids[i]));
  }
  auto res = fdcheck::check_gradient(run, flatten(), analytic);
  std::printf("%-14s max rel err %.3e  %s\n", name, res.max_rel_err, res.max_rel_err > 1e-5 ? res.where.c_str() : "");
  return res.max_rel_err;
}

// random weighted sum to make any output a scalar
NodeId wsum(Tape& t, NodeId x, uint64_t seed = 9) {
  Rng r(seed);
  Tensor w = Tensor::randn(t.rows(x), t.cols(x), r);
  if (t.cols(x) == 1) return t.dot_(x, t.leaf(w));
  // flatten via hadamard+dot trick: sum(hadamard(x,w)) = dot over rows of... use dot on columns
  NodeId h = t.hadamard(x, t.leaf(w));
  // sum all entries: multiply by ones from both sides
  Tensor ones_r(t.rows(x), 1); std::fill(ones_r.data.begin(), ones_r.data.end(), 1.0);
  Tensor ones_c(t.cols(x), 1); std::fill(ones_c.data.begin(), ones_c.data.end(), 1.0);
  return t.dot_(t.matmul(h, t.leaf(ones_c)), t.leaf(ones_r));
}

int main() {
  double worst = 0;
  auto track = [&](double e) { worst = std::max(worst, e); };
  track(check_op("matmul", {{3,4},{4,2}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.matmul(in[0], in[1])); }));
  track(check_op("matmul_tn", {{4,3},{4,2}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.matmul(in[0], in[1], true, false)); }));
  track(check_op("matmul_nt", {{3,4},{2,4}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.matmul(in[0], in[1], false, true)); }));
  track(check_op("add", {{5,1},{5,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.add(in[0], in[1])); }));
  track(check_op("sub", {{5,1},{5,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.sub(in[0], in[1])); }));
  track(check_op("tanh", {{6,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.tanh_(in[0])); }));
  track(check_op("sigmoid", {{6,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.sigmoid_(in[0])); }));
  track(check_op("softplus", {{6,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.softplus(in[0])); }));
  track(check_op("hadamard", {{6,1},{6,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.hadamard(in[0], in[1])); }));
  track(check_op("outer", {{4,1},{3,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.outer(in[0], in[1])); }));
  track(check_op("concat", {{3,1},{4,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.concat({in[0], in[1]})); }));
  track(check_op("slice", {{8,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.slice_rows(in[0], 2, 4)); }));
  track(check_op("softmax", {{7,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.softmax(in[0])); }));
  track(check_op("scale", {{5,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.scale(in[0], 2.5, -0.7)); }));
  track(check_op("scalar_mul", {{5,1},{1,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.scalar_mul(in[0], in[1])); }));
  track(check_op("layer_norm", {{50,1},{50,1},{50,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.layer_norm(in[0], in[1], in[2])); }));
  track(check_op("cosine_rows", {{5,4},{4,1}}, [](Tape& t, const std::vector<NodeId>& in) { return wsum(t, t.cosine_rows(in[0], in[1])); }));
  track(check_op("sharpen", {{6,1},{1,1}}, [](Tape& t, const std::vector<NodeId>& in) {
    // sharpen needs positive w and gamma >= 1
    NodeId w = t.softmax(in[0]);
    NodeId gamma = t.scale(t.softplus(in[1]), 1.0, 1.0);
    return wsum(t, t.sharpen(w, gamma));
  }));
  track(check_op("dot", {{5,1},{5,1}}, [](Tape& t, const std::vector<NodeId>& in) { return t.dot_(in[0], in[1]); }));

  // unrolled cells: 3 steps, 5 hidden units, gradient wrt ALL params
  for (auto arch : {Arch::RnnLn, Arch::LstmLn, Arch::FastWeights, Arch::ReducedNtm}) {
    CellConfig cfg;
    cfg.arch = arch;
    cfg.input_dim = 5; cfg.hidden = 5; cfg.output_dim = 5;
    cfg.ntm.slots = 8; cfg.ntm.word = 4; cfg.ntm.read_heads = 2;
    Model model(cfg, 3);
    Rng rng(11);
    std::vector<Tensor> xs = {Tensor::randn(5,1,rng), Tensor::randn(5,1,rng), Tensor::randn(5,1,rng)};
    Tensor target = Tensor::randn(5,1,rng);
    auto run_with = [&](const std::vector<double>& flat) {
      Model local(cfg, 3);
      local.params().unflatten(flat);
      Tape tape;
      auto pass = local.begin_pass(tape);
      for (auto& x : xs) local.step(pass, tape.leaf(x));
      NodeId pred = local.readout(pass);
      NodeId d = tape.sub(pred, tape.leaf(target));
      return tape.value(tape.scale(tape.dot_(d, d), 0.2))[0];
    };
    std::vector<double> grads(model.params().total_size(), 0.0);
    Tape tape;
    // reuse train_pass structure manually to grab grads
    auto pass = model.begin_pass(tape);
    for (auto& x : xs) model.step(pass, tape.leaf(x));
    NodeId pred = model.readout(pass);
    NodeId d = tape.sub(pred, tape.leaf(target));
    NodeId loss = tape.scale(tape.dot_(d, d), 0.2);
    tape.backward(loss);
    size_t off = 0, pi = 0;
    for (auto& [name, t] : model.params().items) {
      const double* g = tape.grad((NodeId)pi);
      for (size_t k = 0; k < t.data.size(); ++k) grads[off + k] = g[k];
      off += t.data.size(); ++pi;
    }
    auto res = fdcheck::check_gradient(run_with, model.params().flatten(), grads, 1e-5);
    std::printf("cell %-5s max rel err %.3e  %s\n", arch_name(arch), res.max_rel_err,
                res.max_rel_err > 1e-4 ? res.where.c_str() : "");
    track(res.max_rel_err);
  }
  std::printf("WORST %.3e\n", worst);
  return worst < 1e-4 ? 0 : 1;
}
