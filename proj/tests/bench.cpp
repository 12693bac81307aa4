#include "schemabind/harness.hpp"
#include <chrono>
#include <cstdio>

int main() {
  using namespace schemabind;
  auto g = parse_schema(read_file("data/default.schema"));
  auto data = build_experiment3(g, "hash", 7);
  CellConfig cfg;
  cfg.arch = Arch::ReducedNtm;
  Model m(cfg, 1);
  std::vector<double> grads(m.params().total_size(), 0.0);
  Tape tape;
  auto& ex = data.train.examples[0];
  const auto& target = data.lexicon.embedding(ex.answer);
  auto t0 = std::chrono::steady_clock::now();
  int n = 50;
  double loss = 0;
  for (int i = 0; i < n; ++i) loss += m.train_pass(tape, ex.input, data.lexicon, target, grads);
  auto t1 = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / n;
  std::printf("ntm train_pass: %.2f ms/example -> %.1f s per 1000 steps of batch 16 (single thread)\n",
              ms, ms * 16 * 1000 / 1000.0);
  // fw for comparison
  cfg.arch = Arch::FastWeights;
  Model mf(cfg, 1);
  std::vector<double> gf(mf.params().total_size(), 0.0);
  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) loss += mf.train_pass(tape, ex.input, data.lexicon, target, gf);
  t1 = std::chrono::steady_clock::now();
  std::printf("fw  train_pass: %.2f ms/example (loss accum %.3f)\n",
              std::chrono::duration<double, std::milli>(t1 - t0).count() / n, loss);
  return 0;
}
