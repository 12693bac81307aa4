// Bisect what blocks learning: roles, query selection, noise insertion.
#include "schemabind/harness.hpp"
#include <cstdio>

using namespace schemabind;

int main(int argc, char** argv) {
  std::string arch = argc > 1 ? argv[1] : "fw";
  long steps = argc > 2 ? std::atol(argv[2]) : 4000;
  int n_roles = argc > 3 ? std::atoi(argv[3]) : 4;
  int n_queries = argc > 4 ? std::atoi(argv[4]) : 4;   // queries over first n_queries roles
  bool noise = argc > 5 ? std::atoi(argv[5]) : 1;
  int pool = argc > 6 ? std::atoi(argv[6]) : 1000;
  double lr = argc > 7 ? std::atof(argv[7]) : 1e-4;
  Lexicon lex(3, 50);
  for (int r = 0; r < n_roles; ++r) lex.add_word("QR" + std::to_string(r));
  for (int c = 0; c <= n_roles; ++c) lex.add_word("const" + std::to_string(c));
  for (int f = 0; f < pool; ++f) lex.add_word("f" + std::to_string(f));
  lex.add_word(kNonsenseWord);
  int L = 2 * n_roles + 1 + 2;
  CellConfig cfg; cfg.arch = arch_from_name(arch);
  Model m(cfg, 42);
  size_t np = m.params().total_size();
  AdamState adam(np, lr);
  std::vector<double> params = m.params().flatten();
  std::vector<double> grads(np);
  Rng rng(99);
  Tape tape;
  for (long s = 1; s <= steps; ++s) {
    std::fill(grads.begin(), grads.end(), 0.0);
    double loss = 0;
    for (int b = 0; b < 16; ++b) {
      // frame: const0 F0 const1 F1 ... constN, with optional noise insertion
      std::vector<std::string> story;
      std::vector<std::string> fillers(n_roles);
      std::vector<int> used;
      for (int r = 0; r < n_roles; ++r) {
        int pick;
        for (;;) {
          pick = (int)rng.below(pool);
          bool dup = false;
          for (int u : used) dup |= (u == pick);
          if (!dup) break;
        }
        used.push_back(pick);
        fillers[r] = "f" + std::to_string(pick);
      }
      for (int r = 0; r < n_roles; ++r) {
        story.push_back("const" + std::to_string(r));
        story.push_back(fillers[r]);
      }
      story.push_back("const" + std::to_string(n_roles));
      std::vector<std::string> input;
      int npos = noise ? (int)rng.below(story.size() + 1) : (int)story.size();
      for (size_t i = 0; i < story.size(); ++i) {
        if ((int)i == npos) input.push_back(kNonsenseWord);
        input.push_back(story[i]);
      }
      if (npos == (int)story.size()) input.push_back(kNonsenseWord);
      int q = (int)rng.below(n_queries);
      while ((int)input.size() < L - 1) input.push_back(kNonsenseWord);
      input.push_back("QR" + std::to_string(q));
      loss += m.train_pass(tape, input, lex, lex.embedding(fillers[q]), grads);
    }
    for (auto& gv : grads) gv /= 16;
    loss /= 16;
    clip_global_norm(grads, 10.0);
    adam_step(params, grads, adam);
    m.params().unflatten(params);
    if (s % (steps / 6) == 0) std::printf("  step %5ld loss %.5f\n", s, loss);
  }
  return 0;
}
