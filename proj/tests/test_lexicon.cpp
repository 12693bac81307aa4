#include <catch2/catch_amalgamated.hpp>

#include "schemabind/digest.hpp"
#include "schemabind/lexicon.hpp"
#include "schemabind/schema.hpp"
#include "schemabind/storygen.hpp"

using namespace schemabind;

TEST_CASE("new_embedding draws unit-norm vectors") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    auto e = new_embedding(50, rng);
    double norm2 = 0.0;
    for (double x : e) norm2 += x * x;
    REQUIRE(std::abs(std::sqrt(norm2) - 1.0) < 1e-9);
  }
  REQUIRE_THROWS_AS(new_embedding(0, rng), DimensionError);
}

TEST_CASE("independent embeddings are nearly orthogonal") {
  // Monte-Carlo oracle: over 10,000 seeded pairs, |cosine| < 0.5 should hold
  // essentially always for 50-dimensional random directions.
  Rng rng(77);
  int violations = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto a = new_embedding(50, rng);
    auto b = new_embedding(50, rng);
    if (std::abs(cosine(a, b)) >= 0.5) ++violations;
  }
  REQUIRE(violations <= n / 1000);  // >= 99.9% of pairs
}

TEST_CASE("embedding regeneration is bit-identical") {
  Lexicon a(42, 50), b(42, 50);
  for (const char* w : {"alpha", "beta", "gamma"}) {
    a.add_word(w);
    b.add_word(w);
  }
  for (const char* w : {"alpha", "beta", "gamma"}) REQUIRE(a.embedding(w) == b.embedding(w));
  Lexicon c(43, 50);
  c.add_word("alpha");
  REQUIRE(a.embedding("alpha") != c.embedding("alpha"));
}

TEST_CASE("bias_even_indices") {
  SECTION("zero vector") {
    Embedding e{0, 0, 0, 0};
    REQUIRE(bias_even_indices(e, 0.5) == Embedding{0.5, 0, 0.5, 0});
  }
  SECTION("zero delta is the identity") {
    Rng rng(3);
    auto e = new_embedding(50, rng);
    REQUIRE(bias_even_indices(e, 0.0) == e);
  }
  SECTION("shifts the even/odd mean gap by exactly delta") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      auto e = new_embedding(50, rng);
      auto gap = [](const Embedding& v) {
        double even = 0, odd = 0;
        for (size_t i = 0; i < v.size(); ++i) (i % 2 ? odd : even) += v[i];
        return even / (v.size() / 2.0) - odd / (v.size() / 2.0);
      };
      auto out = bias_even_indices(e, 0.37);
      REQUIRE(std::abs(gap(out) - (0.37 + gap(e))) < 1e-12);
      // no renormalization afterward
      double n2 = 0;
      for (double x : out) n2 += x * x;
      REQUIRE(std::abs(std::sqrt(n2) - 1.0) > 1e-6);
    }
  }
}

namespace {

Corpus toy_corpus(int n, uint64_t seed, int dim = 50) {
  Lexicon lex(seed, dim);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back("w" + std::to_string(i));
    lex.add_word(ids.back());
  }
  return build_corpus(lex, ids, {});
}

}  // namespace

TEST_CASE("nearest_word") {
  Corpus corpus = toy_corpus(10, 5);
  SECTION("an exact embedding decodes to itself") {
    for (size_t i = 0; i < corpus.size(); ++i)
      REQUIRE(nearest_word(corpus.embs[i], corpus) == corpus.ids[i]);
  }
  SECTION("cosine is scale invariant") {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
      auto v = new_embedding(50, rng);
      auto scaled = v;
      double c = 0.1 + 3.6 * rng.uniform();
      for (auto& x : scaled) x *= c;
      REQUIRE(nearest_word(v, corpus) == nearest_word(scaled, corpus));
    }
    auto v = corpus.embs[4];
    for (auto& x : v) x *= 3.7;
    REQUIRE(nearest_word(v, corpus) == corpus.ids[4]);
  }
  SECTION("ties break to the lowest corpus index") {
    Corpus dup = toy_corpus(8, 6);
    dup.embs[5] = dup.embs[2];  // engineered duplicate at indices 2 and 5
    REQUIRE(nearest_word(dup.embs[5], dup) == dup.ids[2]);
  }
  SECTION("all-zero output is rejected") {
    Embedding zero(50, 0.0);
    REQUIRE_THROWS_AS(nearest_word(zero, corpus), NumericError);
  }
}

TEST_CASE("ranking_score") {
  SECTION("top rank with 80 words") {
    Corpus corpus = toy_corpus(80, 7);
    REQUIRE(ranking_score(corpus.embs[13], corpus.ids[13], corpus) == Catch::Approx(0.9875));
  }
  SECTION("bottom rank scores zero") {
    Corpus corpus = toy_corpus(5, 8);
    // output equal to the negation of the target ranks it last
    auto anti = corpus.embs[0];
    Corpus tiny;
    tiny.ids = {"target", "a", "b"};
    tiny.embs = {corpus.embs[0], corpus.embs[1], corpus.embs[2]};
    for (auto& x : anti) x = -x;
    // make the two competitors closer to anti than the target is
    REQUIRE(ranking_score(anti, "target", tiny) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("missing target") {
    Corpus corpus = toy_corpus(4, 9);
    Rng rng(10);
    auto out = new_embedding(50, rng);
    REQUIRE_THROWS_AS(ranking_score(out, "absent", corpus), DataError);
  }
  SECTION("chance rate is one half") {
    // random outputs against random targets; rank is uniform so the mean
    // score converges to 0.5 - 1/(2n)
    Corpus corpus = toy_corpus(80, 11);
    Rng rng(12);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      auto out = new_embedding(50, rng);
      sum += ranking_score(out, corpus.ids[rng.below(corpus.size())], corpus);
    }
    REQUIRE(sum / n == Catch::Approx(0.5).margin(0.02));
  }
  SECTION("score 1 - 1/n exactly when nearest_word hits the target uniquely") {
    Corpus corpus = toy_corpus(44, 13);
    Rng rng(14);
    for (int t = 0; t < 50; ++t) {
      auto out = new_embedding(50, rng);
      const auto& best = nearest_word(out, corpus);
      double top = 1.0 - 1.0 / static_cast<double>(corpus.size());
      REQUIRE(ranking_score(out, best, corpus) == Catch::Approx(top));
    }
  }
}

TEST_CASE("build_corpus") {
  Lexicon lex(20, 50);
  for (const char* w : {"a", "b", "c"}) lex.add_word(w);
  SECTION("unions and deduplicates in order") {
    Corpus c = build_corpus(lex, {"a", "b"}, {"b", "c"});
    REQUIRE(c.ids == std::vector<std::string>{"a", "b", "c"});
  }
  SECTION("degenerate single-word corpus is built but fails the chance-rate guard") {
    Corpus c = build_corpus(lex, {"a"}, {});
    REQUIRE(c.size() == 1);
    REQUIRE_THROWS_AS(chance_rate(c), DataError);
  }
  SECTION("empty union is rejected") { REQUIRE_THROWS_AS(build_corpus(lex, {}, {}), DataError); }
}

TEST_CASE("experiment corpus sizes match the published chance rates") {
  auto g = parse_schema(read_file(std::string(TEST_DATA_DIR) + "/default.schema"));
  SECTION("limited-filler configuration decodes over 44 words") {
    auto data = build_experiment1(g, "hash", 3, 500);
    std::vector<std::string> fixed = data.fixed_words;
    fixed.insert(fixed.end(), data.train_pool.begin(), data.train_pool.end());
    Corpus c = build_corpus(data.lexicon, fixed, {});
    REQUIRE(c.size() == 44);
    REQUIRE(chance_rate(c) == Catch::Approx(0.023).margin(0.0005));
  }
  SECTION("unlimited-filler validation batch decodes over 75..80 words") {
    auto data = build_experiment3(g, "hash", 3);
    std::vector<std::string> batch_fillers;
    for (int i = 0; i < 4; ++i)
      batch_fillers.insert(batch_fillers.end(), data.test.examples[i].fillers.begin(),
                           data.test.examples[i].fillers.end());
    Corpus c = build_corpus(data.lexicon, data.fixed_words, batch_fillers);
    REQUIRE(c.size() >= 75);
    REQUIRE(c.size() <= 80);
    REQUIRE(chance_rate(c) == Catch::Approx(0.013).margin(0.0005));
  }
}

TEST_CASE("random predictions hit targets at the corpus chance rate") {
  Corpus corpus = toy_corpus(44, 21);
  Rng rng(22);
  const int n = 20000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    auto out = new_embedding(50, rng);
    hits += nearest_word(out, corpus) == corpus.ids[rng.below(corpus.size())];
  }
  double p = 1.0 / 44.0;
  double se = std::sqrt(p * (1 - p) / n);
  REQUIRE(std::abs(hits / static_cast<double>(n) - p) < 4 * se);
}

TEST_CASE("lexicon serialization round-trips bit-exactly") {
  Lexicon lex(99, 50);
  lex.add_word("alpha");
  lex.add_word("nonsense");
  lex.add_word("beta");
  auto text = lex.to_text();
  REQUIRE(text.rfind("#dim=50 seed=99", 0) == 0);
  auto back = Lexicon::from_text(text);
  REQUIRE(back.size() == lex.size());
  for (const auto& id : lex.ids()) REQUIRE(back.embedding(id) == lex.embedding(id));
  REQUIRE(back.to_text() == text);
  REQUIRE(Lexicon::is_nonsense("nonsense"));
  REQUIRE_FALSE(Lexicon::is_nonsense("alpha"));
}
