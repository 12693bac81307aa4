#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <map>

#include "schemabind/digest.hpp"
#include "schemabind/rng.hpp"
#include "schemabind/schema.hpp"

using namespace schemabind;

namespace {
const std::string kDefaultSchemaPath = std::string(TEST_DATA_DIR) + "/default.schema";

// Independent enumeration oracle: dynamic programming over role bitmasks
// instead of explicit path recursion.
long enumerate_by_mask_dp(const SchemaGraph& g) {
  std::map<std::string, int> role_bit;
  for (size_t i = 0; i < g.roles.size(); ++i) role_bit[g.roles[i]] = static_cast<int>(i);
  unsigned query_mask = 0;
  for (const auto& q : g.queries) query_mask |= 1u << role_bit.at(SchemaGraph::role_of_query(q));

  // paths_from[s][mask] = number of s->terminal paths whose suffix binds mask
  std::vector<std::map<unsigned, long>> memo(g.states.size());
  std::vector<char> done(g.states.size(), 0);
  auto state_mask = [&](int s) {
    unsigned m = 0;
    for (const auto& t : g.states[s].tokens)
      if (t.is_role) m |= 1u << role_bit.at(t.text);
    return m;
  };
  // topological order by repeated relaxation (graphs here are tiny)
  std::function<const std::map<unsigned, long>&(int)> solve = [&](int s) -> const std::map<unsigned, long>& {
    if (done[s]) return memo[s];
    done[s] = 1;
    unsigned mine = state_mask(s);
    if (g.states[s].successors.empty()) {
      memo[s][mine] = 1;
      return memo[s];
    }
    for (int nxt : g.states[s].successors)
      for (const auto& [mask, count] : solve(nxt)) memo[s][mask | mine] += count;
    return memo[s];
  };
  long total = 0;
  for (const auto& [mask, count] : solve(g.start))
    total += count * __builtin_popcount(mask & query_mask);
  return total;
}
}  // namespace

TEST_CASE("default schema parses to the expected counts") {
  auto g = parse_schema(read_file(kDefaultSchemaPath));
  REQUIRE(g.states.size() == 10);
  REQUIRE(g.roles.size() == 6);
  REQUIRE(g.queries.size() == 6);
  REQUIRE(g.frame_words().size() == 25);
  REQUIRE(g.is_acyclic());
  REQUIRE(g.states[g.start].id == "begin");
  REQUIRE(g.terminal() >= 0);
}

TEST_CASE("minimal two-state schema with no roles") {
  auto g = parse_schema("start begin\nstate begin: hello -> end\nstate end: bye\n");
  REQUIRE(g.states.size() == 2);
  REQUIRE(g.queries.empty());
  REQUIRE(g.roles.empty());
  REQUIRE(enumerate_distinguishable(g) == 0);
}

TEST_CASE("parse errors carry locations and name the offender") {
  SECTION("transition to undeclared state") {
    try {
      parse_schema("start a\nstate a: x -> xyz\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      REQUIRE(std::string(e.what()).find("xyz") != std::string::npos);
      REQUIRE(e.line == 2);
    }
  }
  SECTION("duplicate state id") {
    REQUIRE_THROWS_WITH(parse_schema("start a\nstate a: x -> b\nstate b: y\nstate a: z\n"),
                        Catch::Matchers::ContainsSubstring("duplicate state id a"));
  }
  SECTION("unreachable state") {
    REQUIRE_THROWS_WITH(
        parse_schema("start a\nstate a: x\nstate b: y -> a\nstate c: z -> a\n"),
        Catch::Matchers::ContainsSubstring("unreachable"));
  }
  SECTION("unbound role behind a query") {
    REQUIRE_THROWS_WITH(parse_schema("start a\nstate a: x\nquery QWaiter\n"),
                        Catch::Matchers::ContainsSubstring("unbound role Waiter"));
  }
  SECTION("empty template") {
    REQUIRE_THROWS_WITH(parse_schema("start a\nstate a: -> b\nstate b: y\n"),
                        Catch::Matchers::ContainsSubstring("empty template"));
  }
  SECTION("two terminal states") {
    REQUIRE_THROWS_WITH(parse_schema("start a\nstate a: x -> b\nstate b: y\nstate c: z\n"),
                        Catch::Matchers::ContainsSubstring("unreachable"));
    REQUIRE_THROWS_WITH(
        parse_schema("start a\nstate a: x -> b|c\nstate b: y\nstate c: z\n"),
        Catch::Matchers::ContainsSubstring("exactly one terminal"));
  }
}

TEST_CASE("enumerate_distinguishable") {
  SECTION("default schema yields 112") {
    auto g = parse_schema(read_file(kDefaultSchemaPath));
    REQUIRE(enumerate_distinguishable(g) == 112);
    REQUIRE(enumerate_by_mask_dp(g) == 112);
  }
  SECTION("linear schema with all six roles counts once per query") {
    auto g = parse_schema(
        "start s0\n"
        "state s0: w0 [A] -> s1\n"
        "state s1: w1 [B] [C] -> s2\n"
        "state s2: w2 [D] [E] [F]\n"
        "query QA\nquery QB\nquery QC\nquery QD\nquery QE\nquery QF\n");
    REQUIRE(enumerate_distinguishable(g) == 6);
    REQUIRE(enumerate_by_mask_dp(g) == 6);
  }
  SECTION("a role on only one branch is counted only there") {
    auto g = parse_schema(
        "start s\n"
        "state s: x [Subject] -> a|b\n"
        "state a: y [Poet] -> t\n"
        "state b: z -> t\n"
        "state t: w\n"
        "query QSubject\nquery QPoet\n");
    // path via a: QSubject+QPoet answerable; via b: QSubject only
    REQUIRE(enumerate_distinguishable(g) == 3);
    REQUIRE(enumerate_by_mask_dp(g) == 3);
  }
  SECTION("cyclic graph is rejected") {
    auto g = parse_schema("start a\nstate a: x -> b\nstate b: y -> a|c\nstate c: z\n");
    REQUIRE_FALSE(g.is_acyclic());
    REQUIRE_THROWS_AS(enumerate_distinguishable(g), DataError);
  }
  SECTION("agreement with the mask oracle on random small acyclic schemas") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
      int n = 4 + static_cast<int>(rng.below(8));  // up to 12 states (layered, acyclic)
      std::string text = "start s0\n";
      static const char* role_names[4] = {"A", "B", "C", "D"};
      for (int s = 0; s < n; ++s) {
        text += "state s" + std::to_string(s) + ":";
        text += " w" + std::to_string(s);
        int nroles = static_cast<int>(rng.below(3));
        for (int r = 0; r < nroles; ++r)
          text += std::string(" [") + role_names[rng.below(4)] + "]";
        if (s + 1 < n) {
          text += " ->";
          int nsucc = 1 + static_cast<int>(rng.below(std::min<uint64_t>(3, n - s - 1)));
          std::vector<int> succ;
          for (int k = 0; k < nsucc; ++k) {
            int cand = s + 1 + static_cast<int>(rng.below(static_cast<uint64_t>(n - s - 1)));
            if (std::find(succ.begin(), succ.end(), cand) == succ.end()) succ.push_back(cand);
          }
          // keep the layered chain connected so exactly one terminal exists
          if (std::find(succ.begin(), succ.end(), s + 1) == succ.end()) succ.push_back(s + 1);
          for (size_t k = 0; k < succ.size(); ++k)
            text += (k ? "|" : " ") + std::string("s") + std::to_string(succ[k]);
        }
        text += "\n";
      }
      for (const char* r : role_names) text += std::string("query Q") + r + "\n";
      SchemaGraph g;
      try {
        g = parse_schema(text);
      } catch (const ParseError&) {
        continue;  // a query may reference a role that never appeared
      }
      REQUIRE(enumerate_distinguishable(g) == enumerate_by_mask_dp(g));
    }
  }
}

TEST_CASE("input length covers the longest story plus noise and query") {
  auto g = parse_schema(read_file(kDefaultSchemaPath));
  REQUIRE(g.input_length() == g.max_story_tokens() + 2);
  int longest = 0;
  for (const auto& p : g.enumerate_paths()) longest = std::max(longest, g.path_token_count(p));
  REQUIRE(g.max_story_tokens() == longest);
}
