#include "schemabind/harness.hpp"
#include <cstdio>
#include <chrono>

int main(int argc, char** argv) {
  using namespace schemabind;
  std::string arch = argc > 1 ? argv[1] : "fw";
  std::string exp = argc > 2 ? argv[2] : "1";
  long steps = argc > 3 ? std::atol(argv[3]) : 2000;
  auto g = parse_schema(read_file("data/default.schema"));
  ExperimentData data;
  if (exp == "1") data = build_experiment1(g, "h", 7, 20000);
  else if (exp == "3") data = build_experiment3(g, "h", 7);
  std::printf("train=%zu test=%zu L=%d lexicon=%zu\n", data.train.examples.size(),
              data.test.examples.size(), data.L, data.lexicon.size());
  CellConfig cfg;
  cfg.arch = arch_from_name(arch);
  Model m(cfg, 42);
  TrainConfig tc;
  tc.experiment = exp;
  tc.arch = cfg.arch;
  tc.seed = 42;
  tc.max_steps = steps;
  tc.eval_interval = steps / 8;
  tc.eval_sample = 200;
  auto t0 = std::chrono::steady_clock::now();
  auto result = train(m, data, tc);
  auto t1 = std::chrono::steady_clock::now();
  for (const auto& row : result.metrics)
    if (row.split == "test")
      std::printf("step %6ld test acc=%.3f loss=%.4f\n", row.step, row.overall_acc, row.loss);
  std::printf("elapsed %.1f s\n", std::chrono::duration<double>(t1 - t0).count());
  return 0;
}
