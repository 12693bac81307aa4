#include "schemabind/harness.hpp"
#include <cstdio>

int main(int argc, char** argv) {
  using namespace schemabind;
  std::string arch = argc > 1 ? argv[1] : "fw";
  long steps = argc > 2 ? std::atol(argv[2]) : 300;
  double lr = argc > 3 ? std::atof(argv[3]) : 1e-4;
  auto g = parse_schema(read_file("data/default.schema"));
  auto data = build_experiment1(g, "h", 7, 20000);
  CellConfig cfg; cfg.arch = arch_from_name(arch);
  Model m(cfg, 42);
  size_t np = m.params().total_size();
  AdamState adam(np, lr);
  std::vector<double> params = m.params().flatten();
  std::vector<double> grads(np);
  Rng brng(derive_seed(42, "batch order"));
  Tape tape;
  for (long s = 1; s <= steps; ++s) {
    std::fill(grads.begin(), grads.end(), 0.0);
    double loss = 0;
    for (int b = 0; b < 16; ++b) {
      auto& ex = data.train.examples[brng.below(data.train.examples.size())];
      loss += m.train_pass(tape, ex.input, data.lexicon, ex.answer.empty() ? Embedding(50, 0.0) : data.lexicon.embedding(ex.answer), grads);
    }
    for (auto& gv : grads) gv /= 16;
    loss /= 16;
    double norm = clip_global_norm(grads, 10.0);
    adam_step(params, grads, adam);
    m.params().unflatten(params);
    if (s % (steps / 10) == 0) std::printf("step %4ld loss %.5f pre-clip grad norm %.4f\n", s, loss, norm);
  }
  return 0;
}
