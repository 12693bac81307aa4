// Forward information flow: how strongly does the final state react to the
// filler embedding at each story position?
#include "schemabind/harness.hpp"
#include <cstdio>

using namespace schemabind;

int main() {
  auto g = parse_schema(read_file("data/default.schema"));
  auto data = build_experiment3(g, "h", 7);
  for (auto arch : {Arch::RnnLn, Arch::LstmLn, Arch::FastWeights, Arch::ReducedNtm}) {
    CellConfig cfg; cfg.arch = arch;
    Model m(cfg, 42);
    Tape tape;
    // pick the longest example
    const Example* exp = &data.train.examples[0];
    for (auto& e : data.train.examples) if (e.path.size() > exp->path.size()) exp = &e;
    auto base = m.forward_sequence(tape, exp->input, data.lexicon).prediction;
    std::printf("%-5s |pred|=%.3f  d(pred)/d(x_p) by position:", arch_name(arch), base.norm());
    Lexicon lex2 = data.lexicon;
    for (size_t p = 1; p < exp->input.size() - 1; p += 6) {
      const auto& tok = exp->input[p];
      auto saved = lex2.embedding(tok);
      auto bumped = saved;
      for (auto& v : bumped) v += 1e-5;
      lex2.set_embedding(tok, bumped);
      Tape t2;
      auto pred = m.forward_sequence(t2, exp->input, lex2).prediction;
      double d = 0;
      for (int j = 0; j < pred.size(); ++j) d += (pred[j] - base[j]) * (pred[j] - base[j]);
      std::printf(" p%zu:%.2e", p, std::sqrt(d) / (1e-5 * std::sqrt(50.0)));
      lex2.set_embedding(tok, saved);
    }
    std::printf("\n");
  }
  return 0;
}
