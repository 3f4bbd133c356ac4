// Acceptance suite: one timed pass/fail line per criterion, nonzero exit on
// any failure.  Data-dependent criteria run on seeded synthetic corpora so
// the whole suite is self-contained.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "dpdp/aernn.hpp"
#include "dpdp/kmeans.hpp"
#include "dpdp/matrix_io.hpp"
#include "dpdp/metrics.hpp"
#include "dpdp/parallel.hpp"
#include "dpdp/pipeline.hpp"
#include "dpdp/segmentation.hpp"
#include "dpdp/symbolic.hpp"
#include "dpdp/synthetic.hpp"
#include "dpdp/vq.hpp"
#include "gradient_check.hpp"

using namespace dpdp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title, double budget_s)
      : number_(number), title_(std::move(title)), budget_s_(budget_s),
        start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    parts_.push_back((ok ? "ok: " : "FAILED: ") + detail);
    ok_ = ok_ && ok;
  }

  void note(const std::string& detail) { parts_.push_back("note: " + detail); }

  void finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    const bool in_budget = elapsed < budget_s_;
    const bool pass = ok_ && in_budget;
    if (!pass) ++failures;
    std::ostringstream line;
    line << (pass ? "[PASS]" : "[FAIL]") << " criterion " << number_ << ": "
         << title_ << " (" << std::fixed;
    line.precision(1);
    line << elapsed << "s";
    if (!in_budget) line << ", over the " << budget_s_ << "s budget";
    line << ")";
    std::cout << line.str() << "\n";
    for (const std::string& p : parts_) std::cout << "       " << p << "\n";
    std::cout.flush();
  }

 private:
  int number_;
  std::string title_;
  double budget_s_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> parts_;
  bool ok_ = true;
};

std::string fmt(double v, int prec = 2) {
  std::ostringstream os;
  os << std::fixed;
  os.precision(prec);
  os << v;
  return os.str();
}

struct RandomInstance {
  Index length;
  Eigen::MatrixXd costs;
  double lambda;
};

RandomInstance randomInstance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cost(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.0, 5.0);
  RandomInstance inst;
  inst.length = 2 + static_cast<Index>(rng() % 9);
  inst.costs = Eigen::MatrixXd::Zero(inst.length + 1, inst.length + 1);
  for (Index a = 1; a <= inst.length; ++a)
    for (Index b = a; b <= inst.length; ++b) inst.costs(a, b) = cost(rng);
  inst.lambda = lam(rng);
  return inst;
}

void criterion1() {
  Criterion c(1, "DP optimality equals brute force on 200 random instances", 5.0);
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const RandomInstance inst = randomInstance(rng);
    const SegmentCostFn cost = [&](Index a, Index b) { return inst.costs(a, b); };
    const DurationPenalty pen = DurationPenalty::linear(inst.lambda);
    const auto dp = dpdpSegment(inst.length, cost, pen, inst.length);
    const auto bf = bruteForceSegment(inst.length, cost, pen, inst.length);
    if (dp.total_cost != bf.total_cost) ++mismatches;
  }
  c.check(mismatches == 0,
          "exact cost equality on 200/200 instances (T <= 10, random costs, "
          "random lambda); mismatches: " + std::to_string(mismatches));
  c.finish();
}

void criterion2() {
  Criterion c(2, "duality: constrained-k matches the lambda solution's segment cost", 5.0);
  std::mt19937_64 rng(202);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const RandomInstance inst = randomInstance(rng);
    const SegmentCostFn cost = [&](Index a, Index b) { return inst.costs(a, b); };
    const auto dp = dpdpSegment(inst.length, cost,
                                DurationPenalty::linear(inst.lambda), inst.length);
    const auto ck = constrainedKSegment(inst.length, cost, dp.size(), inst.length);
    double dp_seg = 0.0;
    for (const Span& s : dp.spans) dp_seg += cost(s.start, s.end);
    if (dp_seg != ck.total_cost) ++mismatches;
  }
  c.check(mismatches == 0,
          "exact segment-cost equality on 100/100 instances; mismatches: " +
              std::to_string(mismatches));
  c.finish();
}

void criterion3() {
  Criterion c(3, "R-value regression against published rows", 5.0);
  struct Row {
    double recall, os, expected;
  };
  const Row rows[] = {{77.7, 6.2, 78.3}, {97.2, 164.5, -40.5}, {85.6, 20.9, 74.8}};
  for (const Row& row : rows) {
    const double got = rValue(row.recall, row.os);
    const bool ok = std::abs(got - row.expected) <= 0.2;
    c.check(ok, "r_value(" + fmt(row.recall, 1) + ", " + fmt(row.os, 1) +
                    ") = " + fmt(got, 2) + ", expected " + fmt(row.expected, 1) +
                    " +- 0.2");
  }
  c.note(
      "the (97.2, 164.5) row is a published-table inconsistency: the closed "
      "form gives -41.41 for the literal rounded inputs; the printed -40.5 "
      "corresponds to OS drawn from the same row's precision/recall");
  const double os_from_pr = (97.2 / 36.9 - 1.0) * 100.0;
  const double via_counts = rValue(97.2, os_from_pr);
  c.note("counts-derived OS (as MetricReport computes it) reproduces it: "
         "r_value(97.2, " + fmt(os_from_pr, 1) + ") = " + fmt(via_counts, 2));
  c.finish();
}

void criterion4() {
  Criterion c(4, "finite-difference gradient agreement on both presets", 30.0);
  std::mt19937_64 rng(404);
  auto corpus = [&](int alphabet) {
    std::vector<std::vector<int>> out;
    for (int i = 0; i < 4; ++i) {
      std::vector<int> seq(4 + static_cast<size_t>(rng() % 6));
      for (int& s : seq) s = 1 + static_cast<int>(rng() % static_cast<uint64_t>(alphabet));
      out.push_back(std::move(seq));
    }
    return out;
  };
  const auto chained =
      testing::gradientCheck(AernnHyper::chainedSpeech(50), 11, 50, corpus(50));
  c.check(chained.max_rel_error <= 1e-4 && chained.checked == 50,
          "chained-speech preset: max relative error " +
              fmt(chained.max_rel_error * 1e6, 3) + "e-6 over " +
              std::to_string(chained.checked) + " sampled parameters");
  const auto phonemic =
      testing::gradientCheck(AernnHyper::phonemic(30), 12, 50, corpus(30));
  c.check(phonemic.max_rel_error <= 1e-4 && phonemic.checked == 50,
          "phonemic preset: max relative error " +
              fmt(phonemic.max_rel_error * 1e6, 3) + "e-6 over " +
              std::to_string(phonemic.checked) + " sampled parameters");
  c.finish();
}

void criterion5() {
  Criterion c(5, "synthetic unit discovery beats the merge baseline", 120.0);
  SpeechlikeConfig gen;
  gen.num_utterances = 100;
  gen.noise_sigma = 0.05;
  gen.lexicon_size = 30;
  gen.min_words = 3;
  gen.max_words = 5;
  gen.seed = 505;
  const SpeechlikeData data = generateSpeechlike(gen);
  const KmeansResult km = kmeansFit(data.features, 50, 50, 1);
  const double tol = gen.frame_period_s * 1.000001;  // one frame

  MetricAccumulator dp_acc({tol, false}), merge_acc({tol, false});
  std::vector<UnitTokenization> dp_units(data.features.size());
  std::vector<UnitTokenization> merge_units(data.features.size());
  parallelFor(static_cast<Index>(data.features.size()), 0, [&](Index i) {
    const FeatureSequence& f = data.features[static_cast<size_t>(i)];
    dp_units[static_cast<size_t>(i)] = encodeUtterance(f, km.codebook, 0.2);
    merge_units[static_cast<size_t>(i)] =
        mergeRepeats(nearestCodes(f, km.codebook), f.utterance_id);
  });
  auto boundarySet = [&](const UnitTokenization& u, double period) {
    TimedBoundarySet set;
    set.utterance_id = u.utterance_id;
    set.terminal = static_cast<double>(u.boundaries.back()) * period;
    for (size_t k = 0; k + 1 < u.boundaries.size(); ++k)
      set.boundaries.push_back(static_cast<double>(u.boundaries[k]) * period);
    return set;
  };
  for (size_t i = 0; i < data.features.size(); ++i) {
    const auto ref = data.unit_alignments[i].boundarySet();
    dp_acc.add(boundarySet(dp_units[i], gen.frame_period_s), ref);
    merge_acc.add(boundarySet(merge_units[i], gen.frame_period_s), ref);
  }
  const MetricReport dp = dp_acc.report();
  const MetricReport merge = merge_acc.report();
  c.check(dp.f1 >= 90.0, "DPDP boundary F1 " + fmt(dp.f1, 1) + " >= 90 at one-frame tolerance");
  c.check(std::abs(dp.os) <= 15.0, "DPDP |OS| " + fmt(std::abs(dp.os), 1) + " <= 15");
  c.check(merge.os > 50.0, "merge-repeats OS " + fmt(merge.os, 1) + " > 50 (no-DP over-segmentation)");
  c.finish();
}

void criterion6() {
  Criterion c(6, "symbolic word segmentation beats the transition-probability baseline", 900.0);
  SymbolicCorpusConfig gen;  // 50-word lexicon, 5000 utterances
  gen.seed = 606;
  const SymbolicCorpusData data = generateSymbolic(gen);

  const BigramModel bigrams = fitBigrams(data.corpus);
  MetricAccumulator tp_acc({0.0, false});
  for (size_t i = 0; i < data.corpus.size(); ++i) {
    const Segmentation seg = transitionProbSegment(bigrams, data.corpus[i]);
    TimedBoundarySet hyp;
    hyp.utterance_id = data.corpus[i].utterance_id;
    hyp.terminal = static_cast<double>(data.corpus[i].length());
    hyp.boundaries = interiorBoundaries(seg);
    tp_acc.add(hyp, data.word_alignments[i]);
  }
  const MetricReport tp = tp_acc.report();

  AernnHyper hyper = AernnHyper::phonemic(gen.alphabet_size);
  const AernnScorer scorer = trainAernn(data.corpus, hyper, 1);
  // The truncated-gamma duration pmf with the geometric segment-count prior,
  // the configuration used for phonemic-style intermediate evaluation.
  const SymbolicSegConfig cfg = SymbolicSegConfig::hsmm();
  std::vector<Segmentation> segs(data.corpus.size());
  parallelFor(static_cast<Index>(data.corpus.size()), 0, [&](Index i) {
    segs[static_cast<size_t>(i)] =
        segmentSymbols(scorer, data.corpus[static_cast<size_t>(i)], cfg);
  });
  MetricAccumulator ae_acc({0.0, false});
  for (size_t i = 0; i < data.corpus.size(); ++i) {
    TimedBoundarySet hyp;
    hyp.utterance_id = data.corpus[i].utterance_id;
    hyp.terminal = static_cast<double>(data.corpus[i].length());
    hyp.boundaries = interiorBoundaries(segs[i]);
    ae_acc.add(hyp, data.word_alignments[i]);
  }
  const MetricReport ae = ae_acc.report();
  c.check(ae.token_f1 >= tp.token_f1 + 10.0,
          "DPDP AE-RNN token F1 " + fmt(ae.token_f1, 1) +
              " exceeds transition-probability token F1 " + fmt(tp.token_f1, 1) +
              " by >= 10 points");

  // With the real phonemic benchmark supplied (corpus plus word alignments
  // in symbol positions), the published-scale gate applies too.
  const char* brent = std::getenv("DPDP_BRENT_CORPUS");
  const char* brent_ali = std::getenv("DPDP_BRENT_ALIGNMENTS");
  if (brent && brent_ali && fs::exists(brent) && fs::exists(brent_ali)) {
    auto corpus = readSymbolCorpus(brent);
    const auto refs = readAlignments(brent_ali);
    std::map<std::string, const ReferenceAlignment*> by_id;
    for (const auto& r : refs) by_id[r.utterance_id] = &r;
    AernnHyper bh = AernnHyper::phonemic(corpus.front().alphabet_size);
    const AernnScorer bs = trainAernn(corpus, bh, 1);
    std::vector<Segmentation> bsegs(corpus.size());
    parallelFor(static_cast<Index>(corpus.size()), 0, [&](Index i) {
      bsegs[static_cast<size_t>(i)] = segmentSymbols(
          bs, corpus[static_cast<size_t>(i)], SymbolicSegConfig::hsmm());
    });
    MetricAccumulator acc({0.0, false});
    for (size_t i = 0; i < corpus.size(); ++i) {
      TimedBoundarySet hyp;
      hyp.utterance_id = corpus[i].utterance_id;
      hyp.terminal = static_cast<double>(corpus[i].length());
      hyp.boundaries = interiorBoundaries(bsegs[i]);
      acc.add(hyp, *by_id.at(corpus[i].utterance_id));
    }
    const MetricReport br = acc.report();
    c.check(br.token_f1 >= 60.0,
            "supplied phonemic benchmark: token F1 " + fmt(br.token_f1, 1) +
                " >= 60");
  } else {
    c.note("genuine Brent corpus not supplied (set DPDP_BRENT_CORPUS and "
           "DPDP_BRENT_ALIGNMENTS); the synthetic gate above is the "
           "desk-scale criterion");
  }
  c.finish();
}

void criterion7() {
  Criterion c(7, "chained pipeline on synthetic speech reaches token F1 >= 80", 600.0);
  const fs::path root =
      fs::temp_directory_path() / ("dpdp_accept7_" + std::to_string(std::random_device{}()));
  fs::create_directories(root / "features");
  // Noisy enough that the scorer cannot memorize whole unit utterances; the
  // word stage then runs the duration-prior configuration with its support
  // tuned to the lexicon's word lengths (2-3 units).
  SpeechlikeConfig gen;
  gen.num_utterances = 2500;
  gen.lexicon_size = 25;
  gen.min_words = 2;
  gen.max_words = 4;
  gen.noise_sigma = 0.08;
  gen.zipf_exponent = 0.8;
  gen.seed = 727;
  const SpeechlikeData data = generateSpeechlike(gen);
  for (const FeatureSequence& f : data.features)
    writeMatrix(root / "features" / (f.utterance_id + ".dpdpf"), f.frames);
  writeAlignments(root / "word_alignments.txt", data.word_alignments);

  PipelineConfig cfg;
  cfg.features_dir = root / "features";
  cfg.alignments_path = root / "word_alignments.txt";
  cfg.output_dir = root / "out";
  cfg.unit_lambda = 0.3;
  cfg.aernn_preset = "phonemic";
  cfg.aernn_steps = 1200;
  cfg.word_variant = "hsmm";
  cfg.word_gamma_shape = 6.0;
  cfg.word_gamma_scale = 0.5;
  cfg.word_max_seg_len = 3;
  cfg.seed = 7;
  cfg.tolerance_s = gen.frame_period_s * 1.000001;  // one frame
  const PipelineResult result = runPipeline(cfg);

  c.check(result.report && result.report->token_f1 >= 80.0,
          "word token F1 " + fmt(result.report ? result.report->token_f1 : 0.0, 1) +
              " >= 80 at one-frame tolerance");

  const auto unit_alis = readAlignments(cfg.output_dir / "unit_alignments.txt");
  std::map<std::string, std::vector<double>> unit_ends;
  for (const auto& a : unit_alis)
    for (const auto& t : a.tokens) unit_ends[a.utterance_id].push_back(t.end);
  bool subset = true;
  for (const UtteranceWords& u : result.words.utterances)
    for (const WordSpanOut& w : u.words) {
      const auto& ends = unit_ends.at(u.utterance_id);
      if (std::find_if(ends.begin(), ends.end(), [&](double e) {
            return std::abs(e - w.end_s) < 1e-9;
          }) == ends.end())
        subset = false;
    }
  c.check(subset, "every word boundary coincides with a unit boundary on every utterance");
  fs::remove_all(root);
  c.finish();
}

void criterion8() {
  Criterion c(8, "externally supplied features: pipeline runs and emits the full column set", 120.0);
  c.note("corpus-scale Buckeye/ZeroSpeech numbers are out of desk-scale reach "
         "by design; this checks the external-features path structurally");
  const fs::path root =
      fs::temp_directory_path() / ("dpdp_accept8_" + std::to_string(std::random_device{}()));
  fs::create_directories(root / "features");
  // Stand-in for externally provided features: written by a foreign process,
  // read back through the documented formats (one CSV among the binaries).
  SpeechlikeConfig gen;
  gen.num_utterances = 12;
  gen.lexicon_size = 5;
  gen.unit_inventory = 12;
  gen.feature_dim = 12;
  gen.seed = 808;
  const SpeechlikeData data = generateSpeechlike(gen);
  for (size_t i = 0; i < data.features.size(); ++i) {
    const FeatureSequence& f = data.features[i];
    if (i == 0) {
      std::ostringstream csv;
      for (Index r = 0; r < f.frames.rows(); ++r) {
        for (Index col = 0; col < f.frames.cols(); ++col)
          csv << (col ? "," : "") << f.frames(r, col);
        csv << "\n";
      }
      atomicWriteText(root / "features" / (f.utterance_id + ".csv"), csv.str());
    } else {
      writeMatrix(root / "features" / (f.utterance_id + ".dpdpf"), f.frames);
    }
  }
  writeAlignments(root / "word_alignments.txt", data.word_alignments);

  PipelineConfig cfg;
  cfg.features_dir = root / "features";
  cfg.alignments_path = root / "word_alignments.txt";
  cfg.output_dir = root / "out";
  cfg.kmeans_k = 12;
  cfg.unit_lambda = 0.2;
  cfg.aernn_steps = 60;
  cfg.aernn_batch_size = 8;
  cfg.seed = 8;
  const PipelineResult result = runPipeline(cfg);
  c.check(result.report.has_value(), "pipeline ran end to end and scored");

  std::ifstream metrics(cfg.output_dir / "metrics.txt");
  std::ostringstream ms;
  ms << metrics.rdbuf();
  const std::string text = ms.str();
  bool all = true;
  for (const char* key :
       {"Prec.", "Rec.", "F1", "OS", "R-val.", "Token F1", "boundary_precision",
        "boundary_recall", "boundary_f1", "os", "r_value", "token_f1"})
    all = all && text.find(key) != std::string::npos;
  c.check(all, "metrics report carries the full column set "
               "(P/R/F1/OS/R-value/token F1, plus key-value lines)");
  fs::remove_all(root);
  c.finish();
}

}  // namespace

int main(int argc, char** argv) {
  void (*criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                          criterion5, criterion6, criterion7, criterion8};
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 8) {
      std::cerr << "usage: acceptance [criterion 1-8]\n";
      return 2;
    }
    criteria[n - 1]();
    return failures == 0 ? 0 : 1;
  }
  std::cout << "acceptance suite\n================\n";
  for (auto* c : criteria) c();
  std::cout << "================\n"
            << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
