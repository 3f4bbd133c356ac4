#include "dpdp/symbolic.hpp"

#include <random>

#include "doctest.h"

using namespace dpdp;

namespace {

SymbolSequence makeSeq(std::vector<int> symbols, int alphabet,
                       const std::string& id = "utt") {
  SymbolSequence s;
  s.symbols = std::move(symbols);
  s.alphabet_size = alphabet;
  s.utterance_id = id;
  return s;
}

AernnScorer randomScorer(int alphabet, uint64_t seed, int layers = 1) {
  AernnHyper h;
  h.alphabet_size = alphabet;
  h.embedding_dim = 8;
  h.encoder_dim = 24;
  h.encoder_layers = layers;
  h.latent_dim = 6;
  h.decoder_dim = 24;
  AernnScorer scorer;
  scorer.hyper = h;
  scorer.params = makeParams(h, seed);
  return scorer;
}

}  // namespace

TEST_CASE("config variants") {
  const SymbolicSegConfig lin = SymbolicSegConfig::linear(3.0);
  CHECK(lin.penalty().kind == DurationKind::kLinear);
  CHECK(lin.penalty().lambda == 3.0);

  const SymbolicSegConfig hsmm = SymbolicSegConfig::hsmm();
  CHECK(hsmm.lambda == 1.0);  // fixed for the probabilistic reading
  const DurationPenalty pen = hsmm.penalty();
  CHECK(pen.kind == DurationKind::kGammaPmf);
  CHECK(pen.lambda == 1.0);
  CHECK(pen.segment_constant == doctest::Approx(-std::log(0.95)));
  CHECK(hsmm.effectiveMaxSegLen() == 50);
  CHECK_THROWS(SymbolicSegConfig::hsmm(7.0, 1.0, 50, 1.5));
}

TEST_CASE("single symbol segments trivially") {
  const AernnScorer scorer = randomScorer(5, 1);
  const Segmentation seg =
      segmentSymbols(scorer, makeSeq({3}, 5), SymbolicSegConfig::linear(3.0));
  REQUIRE(seg.spans.size() == 1);
  CHECK(seg.spans[0] == Span{1, 1});
}

TEST_CASE("agreement with brute force on short utterances") {
  std::mt19937_64 rng(14);
  const AernnScorer scorer = randomScorer(8, 77, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Index t_len = 2 + static_cast<Index>(rng() % 11);
    std::vector<int> syms(static_cast<size_t>(t_len));
    for (int& s : syms) s = 1 + static_cast<int>(rng() % 8);
    const SymbolSequence seq = makeSeq(syms, 8);
    SymbolicSegConfig cfg = SymbolicSegConfig::linear(1.5);
    const Segmentation dp = segmentSymbols(scorer, seq, cfg);
    // Same span-cost table, exhaustive minimum.
    const Eigen::MatrixXd costs =
        aernnSpanCosts(scorer, seq.symbols, cfg.effectiveMaxSegLen());
    const SegmentCostFn cost = [&](Index a, Index b) {
      return costs(a - 1, b - a);
    };
    const Segmentation bf = bruteForceSegment(t_len, cost, cfg.penalty(),
                                              cfg.effectiveMaxSegLen());
    CHECK(dp.total_cost == bf.total_cost);
  }
}

TEST_CASE("hsmm variant never returns spans beyond the truncation") {
  const AernnScorer scorer = randomScorer(4, 3);
  std::mt19937_64 rng(15);
  SymbolicSegConfig cfg = SymbolicSegConfig::hsmm(7.0, 1.0, 8, 0.9);
  cfg.truncation = 8;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> syms(30);
    for (int& s : syms) s = 1 + static_cast<int>(rng() % 4);
    const Segmentation seg = segmentSymbols(scorer, makeSeq(syms, 4), cfg);
    CHECK(isExactCover(seg, 30));
    for (const Span& s : seg.spans) CHECK(s.length() <= 8);
  }
}

TEST_CASE("span count is non-increasing in lambda on symbolic data") {
  const AernnScorer scorer = randomScorer(6, 8);
  std::mt19937_64 rng(16);
  std::vector<int> syms(24);
  for (int& s : syms) s = 1 + static_cast<int>(rng() % 6);
  const SymbolSequence seq = makeSeq(syms, 6);
  Index prev = 25;
  for (double lambda = 0.0; lambda <= 10.0; lambda += 0.5) {
    const Segmentation seg =
        segmentSymbols(scorer, seq, SymbolicSegConfig::linear(lambda));
    CHECK(seg.size() <= prev);
    prev = seg.size();
  }
}

TEST_CASE("scoring the same sequence twice is bit-identical") {
  const AernnScorer scorer = randomScorer(7, 21);
  std::vector<int> syms = {1, 4, 2, 7, 7, 3, 5, 1, 2};
  const SymbolSequence seq = makeSeq(syms, 7);
  const SymbolicSegConfig cfg = SymbolicSegConfig::linear(2.0);
  const Segmentation a = segmentSymbols(scorer, seq, cfg);
  const Segmentation b = segmentSymbols(scorer, seq, cfg);
  CHECK(a.total_cost == b.total_cost);
  REQUIRE(a.spans.size() == b.spans.size());
  for (size_t i = 0; i < a.spans.size(); ++i) CHECK(a.spans[i] == b.spans[i]);
}

TEST_CASE("bigram fit: add-one smoothing and row normalization") {
  const std::vector<SymbolSequence> corpus = {makeSeq({1, 2, 1, 2}, 3)};
  const BigramModel model = fitBigrams(corpus);
  // Counts: 1->2 twice, 2->1 once; alphabet 3 adds one everywhere.
  CHECK(model.transition(1, 2) == doctest::Approx(3.0 / 5.0));
  CHECK(model.transition(1, 1) == doctest::Approx(1.0 / 5.0));
  CHECK(model.transition(3, 1) == doctest::Approx(1.0 / 3.0));
  for (int s = 1; s <= 3; ++s) {
    double row = 0.0;
    for (int t = 1; t <= 3; ++t) row += model.transition(s, t);
    CHECK(row == doctest::Approx(1.0));
  }
}

TEST_CASE("transition dips: cohesive pair is never split") {
  // "ab" (1,2) always co-occurs; "ba" never happens.  Corpus of 20
  // utterances built from words {ab, c, dc}.
  std::mt19937_64 rng(17);
  const std::vector<std::vector<int>> words = {{1, 2}, {3}, {4, 3}};
  std::vector<SymbolSequence> corpus;
  for (int u = 0; u < 20; ++u) {
    std::vector<int> syms;
    const int n = 2 + static_cast<int>(rng() % 4);
    for (int w = 0; w < n; ++w) {
      const auto& word = words[rng() % 3];
      syms.insert(syms.end(), word.begin(), word.end());
    }
    corpus.push_back(makeSeq(std::move(syms), 4, "u" + std::to_string(u)));
  }
  const BigramModel model = fitBigrams(corpus);
  for (const SymbolSequence& seq : corpus) {
    const Segmentation seg = transitionProbSegment(model, seq);
    CHECK(isExactCover(seg, seq.length()));
    for (size_t i = 0; i + 1 < seg.spans.size(); ++i) {
      const Index boundary = seg.spans[i].end;  // boundary after this position
      const int left = seq.symbols[static_cast<size_t>(boundary - 1)];
      const int right = seq.symbols[static_cast<size_t>(boundary)];
      CHECK(!(left == 1 && right == 2));
    }
  }
}

TEST_CASE("transition dips are equivariant under symbol relabeling") {
  std::mt19937_64 rng(18);
  std::vector<SymbolSequence> corpus;
  for (int u = 0; u < 30; ++u) {
    std::vector<int> syms(6 + static_cast<size_t>(rng() % 6));
    for (int& s : syms) s = 1 + static_cast<int>(rng() % 5);
    corpus.push_back(makeSeq(std::move(syms), 5, "u" + std::to_string(u)));
  }
  // Relabel with the permutation (1..5) -> (3 5 4 1 2).
  const int perm[6] = {0, 3, 5, 4, 1, 2};
  std::vector<SymbolSequence> relabeled = corpus;
  for (SymbolSequence& s : relabeled)
    for (int& sym : s.symbols) sym = perm[sym];
  const BigramModel m1 = fitBigrams(corpus);
  const BigramModel m2 = fitBigrams(relabeled);
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Segmentation a = transitionProbSegment(m1, corpus[i]);
    const Segmentation b = transitionProbSegment(m2, relabeled[i]);
    REQUIRE(a.spans.size() == b.spans.size());
    for (size_t k = 0; k < a.spans.size(); ++k) CHECK(a.spans[k] == b.spans[k]);
  }
}

TEST_CASE("transition dips: single symbol has no internal boundary") {
  const BigramModel model = fitBigrams({makeSeq({1, 2, 1}, 2)});
  const Segmentation seg = transitionProbSegment(model, makeSeq({2}, 2));
  REQUIRE(seg.spans.size() == 1);
  CHECK(seg.spans[0] == Span{1, 1});
}

TEST_CASE("interior boundaries exclude the terminal") {
  Segmentation seg;
  seg.spans = {{1, 3}, {4, 4}, {5, 9}};
  const std::vector<double> b = interiorBoundaries(seg);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == 3.0);
  CHECK(b[1] == 4.0);
}
