#include "schemabind/digest.hpp"
#include "schemabind/harness.hpp"
#include "schemabind/manifest.hpp"
#include "schemabind/probes.hpp"
#include "schemabind/svg.hpp"

#include <cstdio>

int main() {
  using namespace schemabind;
  auto g = parse_schema(read_file("data/default.schema"));
  std::printf("states=%zu roles=%zu queries=%zu distinguishable=%ld L=%d\n", g.states.size(),
              g.roles.size(), g.queries.size(), enumerate_distinguishable(g), g.input_length());
  auto data = build_experiment3(g, "hash", 7);
  std::printf("exp3 train=%zu test=%zu\n", data.train.examples.size(), data.test.examples.size());
  Model m(CellConfig{.arch = Arch::ReducedNtm}, 1);
  Tape tape;
  auto fwd = m.forward_sequence(tape, data.train.examples[0].input, data.lexicon, kProbeHidden | kProbeMemory);
  std::printf("ntm params=%zu pred dim=%d trace=%zu nodes=%d\n", m.params().total_size(),
              fwd.prediction.size(), fwd.trace.hidden.size(), tape.node_count());
  return 0;
}
