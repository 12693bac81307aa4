// Minimal diagnostic: one content token + query; predict the content embedding.
#include "schemabind/harness.hpp"
#include <cstdio>

using namespace schemabind;

int main(int argc, char** argv) {
  std::string arch = argc > 1 ? argv[1] : "fw";
  long steps = argc > 2 ? std::atol(argv[2]) : 3000;
  int gap = argc > 3 ? std::atoi(argv[3]) : 0;   // nonsense tokens between content and query
  Lexicon lex(3, 50);
  lex.add_word("Q");
  lex.add_word(kNonsenseWord);
  CellConfig cfg; cfg.arch = arch_from_name(arch);
  Model m(cfg, 42);
  size_t np = m.params().total_size();
  AdamState adam(np, 1e-4);
  std::vector<double> params = m.params().flatten();
  std::vector<double> grads(np);
  Rng rng(99);
  Tape tape;
  for (long s = 1; s <= steps; ++s) {
    std::fill(grads.begin(), grads.end(), 0.0);
    double loss = 0;
    for (int b = 0; b < 16; ++b) {
      // fresh random content word each presentation
      std::string id = "w" + std::to_string(s) + "_" + std::to_string(b);
      lex.set_embedding(id, new_embedding(50, rng));
      std::vector<std::string> input{id};
      for (int k = 0; k < gap; ++k) input.push_back(kNonsenseWord);
      input.push_back("Q");
      loss += m.train_pass(tape, input, lex, lex.embedding(id), grads);
    }
    for (auto& gv : grads) gv /= 16;
    loss /= 16;
    clip_global_norm(grads, 10.0);
    adam_step(params, grads, adam);
    m.params().unflatten(params);
    if (s % (steps / 10) == 0) std::printf("step %5ld copy loss %.5f (zero-pred baseline 0.02)\n", s, loss);
  }
  return 0;
}
