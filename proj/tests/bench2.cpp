#include "schemabind/harness.hpp"
#include <chrono>
#include <cstdio>

using namespace schemabind;
double bench(Model& m, ExperimentData& data, int n, bool backward_too) {
  std::vector<double> grads(m.params().total_size(), 0.0);
  Tape tape;
  auto& ex = data.train.examples[0];
  const auto& target = data.lexicon.embedding(ex.answer);
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) {
    if (backward_too) m.train_pass(tape, ex.input, data.lexicon, target, grads);
    else { tape.reset(); m.forward_sequence(tape, ex.input, data.lexicon); }
  }
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / n;
}
int main() {
  auto g = parse_schema(read_file("data/default.schema"));
  auto data = build_experiment3(g, "hash", 7);
  for (int slots : {32, 128}) {
    CellConfig cfg; cfg.arch = Arch::ReducedNtm; cfg.ntm.slots = slots;
    Model m(cfg, 1);
    std::printf("slots=%3d fwd=%.2f ms  fwd+bwd=%.2f ms\n", slots, bench(m, data, 50, false), bench(m, data, 50, true));
  }
  return 0;
}
