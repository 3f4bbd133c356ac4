#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
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

namespace fs = std::filesystem;
using namespace dpdp;

namespace {

std::string describe(const CLI::App& app) {
  std::ostringstream os;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name() == "--help") continue;
    os << opt->get_name() << " ";
    for (const std::string& r : opt->results()) os << r << " ";
  }
  return os.str();
}

void manifestFor(const CLI::App& sub, const fs::path& out_dir, uint64_t seed) {
  fs::create_directories(out_dir);
  writeRunManifest(out_dir / "run_manifest.txt", sub.get_name(), describe(sub), seed);
}

// Word segments of a symbol corpus, emitted in symbol positions so the
// alignment format (and tol = 0 evaluation) applies unchanged.
std::vector<ReferenceAlignment> wordAlignmentsFromSegmentations(
    const std::vector<SymbolSequence>& corpus,
    const std::vector<Segmentation>& segs) {
  std::vector<ReferenceAlignment> out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    ReferenceAlignment a;
    a.utterance_id = corpus[i].utterance_id;
    for (const Span& s : segs[i].spans) {
      std::string label;
      for (Index t = s.start; t <= s.end; ++t)
        label += (t > s.start ? "_" : "") +
                 std::to_string(corpus[i].symbols[static_cast<size_t>(t - 1)]);
      a.tokens.push_back({static_cast<double>(s.start - 1),
                          static_cast<double>(s.end), label});
    }
    out.push_back(std::move(a));
  }
  return out;
}

int runOracleCheck(int instances, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cost_dist(0.0, 1.0);
  std::uniform_real_distribution<double> lambda_dist(0.0, 5.0);
  int optimality_fail = 0, duality_fail = 0;
  for (int i = 0; i < instances; ++i) {
    const Index t_len = 2 + static_cast<Index>(rng() % 9);
    Eigen::MatrixXd costs(t_len + 1, t_len + 1);
    for (Index a = 1; a <= t_len; ++a)
      for (Index b = a; b <= t_len; ++b) costs(a, b) = cost_dist(rng);
    const SegmentCostFn cost = [&](Index a, Index b) { return costs(a, b); };
    const double lambda = lambda_dist(rng);
    const auto dp =
        dpdpSegment(t_len, cost, DurationPenalty::linear(lambda), t_len);
    const auto bf =
        bruteForceSegment(t_len, cost, DurationPenalty::linear(lambda), t_len);
    if (dp.total_cost != bf.total_cost) ++optimality_fail;
    const auto ck = constrainedKSegment(t_len, cost, dp.size(), t_len);
    double dp_seg = 0.0;
    for (const Span& s : dp.spans) dp_seg += cost(s.start, s.end);
    if (std::abs(dp_seg - ck.total_cost) > 1e-9) ++duality_fail;
  }
  std::cout << (optimality_fail == 0 ? "PASS" : "FAIL")
            << " optimality: dpdp equals brute force on " << instances
            << " random instances (" << optimality_fail << " mismatches)\n";
  std::cout << (duality_fail == 0 ? "PASS" : "FAIL")
            << " duality: constrained-k matches the lambda solution ("
            << duality_fail << " mismatches)\n";
  return optimality_fail + duality_fail == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duration-penalized dynamic programming segmentation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Text config file; flags override its values");
  app.get_config_formatter_base()->valueSeparator(' ');

  // --- kmeans ---
  auto* cmd_kmeans = app.add_subcommand("kmeans", "Fit a K-means codebook over feature frames");
  struct {
    std::string features, out = "codebook.dpdpf";
    Index k = 50;
    int iters = 50;
    uint64_t seed = 0;
    double frame_period = 0.01;
  } km;
  cmd_kmeans->add_option("--features", km.features, "Feature directory")->required();
  cmd_kmeans->add_option("--out", km.out, "Output codebook file");
  cmd_kmeans->add_option("--k", km.k, "Number of codes");
  cmd_kmeans->add_option("--iters", km.iters, "Lloyd iterations");
  cmd_kmeans->add_option("--seed", km.seed, "RNG seed")->required();
  cmd_kmeans->add_option("--frame-period", km.frame_period, "Seconds per frame");

  // --- encode / merge ---
  auto* cmd_encode = app.add_subcommand("encode", "DPDP unit discovery over features");
  auto* cmd_merge = app.add_subcommand("merge", "No-DP baseline: nearest codes, repeats merged");
  struct {
    std::string features, codebook, out_dir;
    double lambda = kDefaultUnitLambda;
    Index max_seg_len = kDefaultUnitMaxSegLen;
    double frame_period = 0.01;
    int workers = 0;
  } enc;
  for (CLI::App* c : {cmd_encode, cmd_merge}) {
    c->add_option("--features", enc.features, "Feature directory")->required();
    c->add_option("--codebook", enc.codebook, "Codebook file")->required();
    c->add_option("--out-dir", enc.out_dir, "Output directory")->required();
    c->add_option("--frame-period", enc.frame_period, "Seconds per frame");
    c->add_option("--workers", enc.workers, "Worker threads (0 = hardware)");
  }
  cmd_encode->add_option("--lambda", enc.lambda, "Duration weight");
  cmd_encode->add_option("--max-seg-len", enc.max_seg_len, "Longest unit in frames");

  // --- train-aernn ---
  auto* cmd_train = app.add_subcommand("train-aernn", "Train the autoencoding recurrent scorer");
  struct {
    std::string corpus, out_dir, preset = "phonemic";
    int alphabet = 0;  // 0: largest symbol in the corpus
    int steps = 1500, batch_size = 32;
    double lr = 1e-3;
    uint64_t seed = 0;
    bool no_eos = false;
  } tr;
  cmd_train->add_option("--corpus", tr.corpus, "Symbol corpus file")->required();
  cmd_train->add_option("--out-dir", tr.out_dir, "Model output directory")->required();
  cmd_train->add_option("--preset", tr.preset, "chained or phonemic")
      ->check(CLI::IsMember({"chained", "phonemic"}));
  cmd_train->add_option("--alphabet", tr.alphabet, "Alphabet size (0 = infer)");
  cmd_train->add_option("--steps", tr.steps, "Optimizer updates");
  cmd_train->add_option("--batch-size", tr.batch_size, "Utterances per update");
  cmd_train->add_option("--lr", tr.lr, "Learning rate");
  cmd_train->add_option("--seed", tr.seed, "RNG seed")->required();
  cmd_train->add_flag("--no-eos", tr.no_eos, "Drop the end-of-segment term");

  // --- segment-words ---
  auto* cmd_segment = app.add_subcommand("segment-words", "Word segmentation of a symbol corpus");
  struct {
    std::string corpus, model, out_dir, variant = "linear", baseline = "none";
    double lambda = kDefaultWordLambda;
    Index max_seg_len = kDefaultSymbolMaxSegLen;
    int workers = 0;
  } sw;
  cmd_segment->add_option("--corpus", sw.corpus, "Symbol corpus file")->required();
  cmd_segment->add_option("--model", sw.model, "Trained scorer directory");
  cmd_segment->add_option("--out-dir", sw.out_dir, "Output directory")->required();
  cmd_segment->add_option("--variant", sw.variant, "linear or hsmm")
      ->check(CLI::IsMember({"linear", "hsmm"}));
  cmd_segment->add_option("--lambda", sw.lambda, "Duration weight (linear variant)");
  cmd_segment->add_option("--max-seg-len", sw.max_seg_len, "Longest word in symbols");
  cmd_segment->add_option("--workers", sw.workers, "Worker threads");
  cmd_segment->add_option("--baseline", sw.baseline,
                          "transition-prob replaces the scorer with bigram dips")
      ->check(CLI::IsMember({"none", "transition-prob"}));
  double sw_gamma_shape = 7.0, sw_gamma_scale = 1.0, sw_geom = 0.95;
  cmd_segment->add_option("--gamma-shape", sw_gamma_shape, "Gamma duration shape (hsmm)");
  cmd_segment->add_option("--gamma-scale", sw_gamma_scale, "Gamma duration scale (hsmm)");
  cmd_segment->add_option("--geom", sw_geom, "Geometric continue probability (hsmm)");

  // --- pipeline ---
  auto* cmd_pipeline = app.add_subcommand("pipeline", "Chained features-to-word-boundaries run");
  PipelineConfig pl;
  std::string pl_features, pl_codebook, pl_alignments, pl_outdir;
  cmd_pipeline->add_option("--features", pl_features, "Feature directory")->required();
  cmd_pipeline->add_option("--codebook", pl_codebook, "Existing codebook (else fit here)");
  cmd_pipeline->add_option("--alignments", pl_alignments, "Reference alignments for scoring");
  cmd_pipeline->add_option("--out-dir", pl_outdir, "Output directory")->required();
  cmd_pipeline->add_option("--unit-lambda", pl.unit_lambda, "Unit discovery duration weight");
  cmd_pipeline->add_option("--word-lambda", pl.word_lambda, "Word segmentation duration weight");
  cmd_pipeline->add_option("--k", pl.kmeans_k, "Codebook size");
  cmd_pipeline->add_option("--kmeans-iters", pl.kmeans_iters, "Lloyd iterations");
  cmd_pipeline->add_option("--preset", pl.aernn_preset, "chained or phonemic")
      ->check(CLI::IsMember({"chained", "phonemic"}));
  cmd_pipeline->add_option("--steps", pl.aernn_steps, "Scorer training steps");
  cmd_pipeline->add_option("--batch-size", pl.aernn_batch_size, "Training batch size");
  cmd_pipeline->add_option("--lr", pl.aernn_learning_rate, "Learning rate");
  cmd_pipeline->add_option("--word-variant", pl.word_variant, "linear or hsmm")
      ->check(CLI::IsMember({"linear", "hsmm"}));
  cmd_pipeline->add_option("--gamma-shape", pl.word_gamma_shape, "Gamma duration shape (hsmm)");
  cmd_pipeline->add_option("--gamma-scale", pl.word_gamma_scale, "Gamma duration scale (hsmm)");
  cmd_pipeline->add_option("--geom", pl.word_geom_prob, "Geometric continue probability (hsmm)");
  cmd_pipeline->add_option("--seed", pl.seed, "RNG seed")->required();
  cmd_pipeline->add_option("--frame-period", pl.frame_period_s, "Seconds per frame");
  cmd_pipeline->add_option("--tolerance", pl.tolerance_s, "Boundary tolerance in seconds");
  cmd_pipeline->add_option("--unit-max-seg-len", pl.unit_max_seg_len, "Longest unit in frames");
  cmd_pipeline->add_option("--word-max-seg-len", pl.word_max_seg_len, "Longest word in units");
  cmd_pipeline->add_option("--workers", pl.workers, "Worker threads");
  cmd_pipeline->add_flag("--merge-baseline", pl.merge_baseline,
                         "Use merged nearest codes instead of DPDP units");

  // --- eval ---
  auto* cmd_eval = app.add_subcommand("eval", "Score hypothesis boundaries against references");
  struct {
    std::string hyp, ref, out;
    double tol = 0.02;
    bool edges = false, per_type = false;
    long min_count = 1;
  } ev;
  cmd_eval->add_option("--hyp", ev.hyp, "Hypothesis alignment file")->required();
  cmd_eval->add_option("--ref", ev.ref, "Reference alignment file")->required();
  cmd_eval->add_option("--out", ev.out, "Also write the report here");
  cmd_eval->add_option("--tol", ev.tol, "Matching tolerance");
  std::string ev_mode = "counts";
  cmd_eval->add_option("--aggregate", ev_mode,
                       "counts (pool counts, then ratios) or utterance-mean")
      ->check(CLI::IsMember({"counts", "utterance-mean"}));
  cmd_eval->add_flag("--edges", ev.edges, "Score utterance-edge boundaries too");
  cmd_eval->add_flag("--per-type", ev.per_type, "Append per-word-type recall");
  cmd_eval->add_option("--min-count", ev.min_count, "Per-type minimum token count");

  // --- generators ---
  auto* cmd_gen_speech = app.add_subcommand("gen-speechlike", "Synthetic features with alignments");
  SpeechlikeConfig sl;
  std::string gen_out;
  cmd_gen_speech->add_option("--out-dir", gen_out, "Output directory")->required();
  cmd_gen_speech->add_option("--lexicon-size", sl.lexicon_size, "Word types");
  cmd_gen_speech->add_option("--min-word-units", sl.min_word_units, "Shortest word in units");
  cmd_gen_speech->add_option("--max-word-units", sl.max_word_units, "Longest word in units");
  cmd_gen_speech->add_option("--inventory", sl.unit_inventory, "Unit inventory size");
  cmd_gen_speech->add_option("--dim", sl.feature_dim, "Feature dimensionality");
  cmd_gen_speech->add_option("--code-spacing", sl.code_spacing, "Pairwise unit vector distance");
  cmd_gen_speech->add_option("--min-unit-frames", sl.min_unit_frames, "Shortest unit in frames");
  cmd_gen_speech->add_option("--max-unit-frames", sl.max_unit_frames, "Longest unit in frames");
  cmd_gen_speech->add_option("--zipf", sl.zipf_exponent, "Zipf exponent");
  cmd_gen_speech->add_option("--sigma", sl.noise_sigma, "Frame noise stddev");
  cmd_gen_speech->add_option("--utterances", sl.num_utterances, "Utterance count");
  cmd_gen_speech->add_option("--min-words", sl.min_words, "Fewest words per utterance");
  cmd_gen_speech->add_option("--max-words", sl.max_words, "Most words per utterance");
  cmd_gen_speech->add_option("--frame-period", sl.frame_period_s, "Seconds per frame");
  cmd_gen_speech->add_option("--seed", sl.seed, "RNG seed")->required();

  auto* cmd_gen_sym = app.add_subcommand("gen-symbolic", "Synthetic symbol corpus with boundaries");
  SymbolicCorpusConfig sy;
  std::string gen_sym_out;
  cmd_gen_sym->add_option("--out-dir", gen_sym_out, "Output directory")->required();
  cmd_gen_sym->add_option("--lexicon-size", sy.lexicon_size, "Word types");
  cmd_gen_sym->add_option("--alphabet", sy.alphabet_size, "Alphabet size");
  cmd_gen_sym->add_option("--min-word-len", sy.min_word_len, "Shortest word");
  cmd_gen_sym->add_option("--max-word-len", sy.max_word_len, "Longest word");
  cmd_gen_sym->add_option("--zipf", sy.zipf_exponent, "Zipf exponent");
  cmd_gen_sym->add_option("--utterances", sy.num_utterances, "Utterance count");
  cmd_gen_sym->add_option("--min-words", sy.min_words, "Fewest words per utterance");
  cmd_gen_sym->add_option("--max-words", sy.max_words, "Most words per utterance");
  cmd_gen_sym->add_option("--seed", sy.seed, "RNG seed")->required();

  // --- oracle-check ---
  auto* cmd_oracle = app.add_subcommand("oracle-check", "Brute-force agreement and duality spot check");
  int oracle_instances = 200;
  uint64_t oracle_seed = 20260811;
  cmd_oracle->add_option("--instances", oracle_instances, "Random instances");
  cmd_oracle->add_option("--seed", oracle_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_kmeans) {
      const auto features = readFeatureDir(km.features, km.frame_period);
      const KmeansResult result = kmeansFit(features, km.k, km.iters, km.seed);
      writeCodebook(km.out, result.codebook);
      manifestFor(*cmd_kmeans, fs::path(km.out).parent_path().empty()
                                   ? "."
                                   : fs::path(km.out).parent_path(),
                  km.seed);
      std::cout << "codebook " << km.out << " inertia "
                << result.inertia.back() << "\n";
    } else if (*cmd_encode || *cmd_merge) {
      const auto features = readFeatureDir(enc.features, enc.frame_period);
      const Codebook cb = readCodebook(enc.codebook);
      const auto units =
          *cmd_encode ? encodeCorpus(features, cb, enc.lambda, enc.max_seg_len,
                                     enc.workers)
                      : mergeCorpus(features, cb, enc.workers);
      fs::create_directories(enc.out_dir);
      writeSymbolCorpus(fs::path(enc.out_dir) / "units.txt",
                        unitsToSymbols(units, static_cast<int>(cb.size())));
      writeAlignments(fs::path(enc.out_dir) / "unit_alignments.txt",
                      unitsToAlignments(units, features));
      manifestFor(*cmd_encode ? *cmd_encode : *cmd_merge, enc.out_dir, 0);
      long n_units = 0;
      for (const auto& u : units) n_units += static_cast<long>(u.codes.size());
      std::cout << "utterances " << units.size() << " units " << n_units << "\n";
    } else if (*cmd_train) {
      auto corpus = readSymbolCorpus(tr.corpus);
      int alphabet = tr.alphabet;
      if (alphabet == 0)
        for (const auto& s : corpus) alphabet = std::max(alphabet, s.alphabet_size);
      for (auto& s : corpus) s.alphabet_size = alphabet;
      AernnHyper hyper = tr.preset == "chained" ? AernnHyper::chainedSpeech(alphabet)
                                                : AernnHyper::phonemic(alphabet);
      hyper.steps = tr.steps;
      hyper.batch_size = tr.batch_size;
      hyper.learning_rate = tr.lr;
      hyper.append_eos = !tr.no_eos;
      const AernnScorer scorer = trainAernn(corpus, hyper, tr.seed);
      saveScorer(tr.out_dir, scorer);
      manifestFor(*cmd_train, tr.out_dir, tr.seed);
      std::cout << "model " << tr.out_dir << " loss " << scorer.meta.initial_loss
                << " -> " << scorer.meta.final_loss << "\n";
    } else if (*cmd_segment) {
      auto corpus = readSymbolCorpus(sw.corpus);
      std::vector<Segmentation> segs(corpus.size());
      if (sw.baseline == "transition-prob") {
        const BigramModel model = fitBigrams(corpus);
        parallelFor(static_cast<Index>(corpus.size()), sw.workers, [&](Index i) {
          segs[static_cast<size_t>(i)] =
              transitionProbSegment(model, corpus[static_cast<size_t>(i)]);
        });
      } else {
        if (sw.model.empty())
          throw std::runtime_error("segment-words needs --model (or --baseline)");
        const AernnScorer scorer = loadScorer(sw.model);
        for (auto& s : corpus) s.alphabet_size = scorer.hyper.alphabet_size;
        SymbolicSegConfig cfg =
            sw.variant == "hsmm"
                ? SymbolicSegConfig::hsmm(sw_gamma_shape, sw_gamma_scale, 50, sw_geom)
                : SymbolicSegConfig::linear(sw.lambda);
        cfg.max_seg_len = sw.max_seg_len;
        parallelFor(static_cast<Index>(corpus.size()), sw.workers, [&](Index i) {
          segs[static_cast<size_t>(i)] =
              segmentSymbols(scorer, corpus[static_cast<size_t>(i)], cfg);
        });
      }
      fs::create_directories(sw.out_dir);
      writeAlignments(fs::path(sw.out_dir) / "word_segments.txt",
                      wordAlignmentsFromSegmentations(corpus, segs));
      manifestFor(*cmd_segment, sw.out_dir, 0);
      long words = 0;
      for (const auto& s : segs) words += s.size();
      std::cout << "utterances " << corpus.size() << " words " << words << "\n";
    } else if (*cmd_pipeline) {
      pl.features_dir = pl_features;
      pl.codebook_path = pl_codebook;
      pl.alignments_path = pl_alignments;
      pl.output_dir = pl_outdir;
      const PipelineResult result = runPipeline(pl);
      if (result.report) std::cout << formatReport(*result.report);
      std::cout << "outputs in " << pl_outdir << "\n";
    } else if (*cmd_eval) {
      const auto hyps = readAlignments(ev.hyp);
      const auto refs = readAlignments(ev.ref);
      std::map<std::string, const ReferenceAlignment*> by_id;
      for (const auto& r : refs) by_id[r.utterance_id] = &r;
      MetricAccumulator acc({ev.tol, ev.edges},
                            ev_mode == "utterance-mean"
                                ? AggregationMode::kUtteranceMean
                                : AggregationMode::kCounts);
      std::vector<TimedBoundarySet> hyp_sets;
      std::vector<ReferenceAlignment> matched_refs;
      for (const auto& h : hyps) {
        const auto it = by_id.find(h.utterance_id);
        if (it == by_id.end())
          throw std::runtime_error("no reference for utterance " + h.utterance_id);
        acc.add(h.boundarySet(), *it->second);
        hyp_sets.push_back(h.boundarySet());
        matched_refs.push_back(*it->second);
      }
      const MetricReport report = acc.report();
      std::ostringstream out;
      out << formatReport(report) << "\n" << formatKeyValues(report);
      if (ev.per_type) {
        const PerTypeReport pt =
            perTypeRecall(hyp_sets, matched_refs, ev.tol, ev.min_count);
        out << "\nper-type recall (hit duration mean " << pt.hit_durations.mean
            << " stddev " << pt.hit_durations.stddev << ")\n";
        for (const TypeRecall& t : pt.types)
          out << t.label << " " << t.recall_pct << " " << t.count << "\n";
      }
      std::cout << out.str();
      if (!ev.out.empty()) atomicWriteText(ev.out, out.str());
    } else if (*cmd_gen_speech) {
      const SpeechlikeData data = generateSpeechlike(sl);
      const fs::path dir(gen_out);
      fs::create_directories(dir / "features");
      for (const FeatureSequence& f : data.features)
        writeMatrix(dir / "features" / (f.utterance_id + ".dpdpf"), f.frames);
      writeAlignments(dir / "word_alignments.txt", data.word_alignments);
      writeAlignments(dir / "unit_alignments.txt", data.unit_alignments);
      writeMatrix(dir / "true_codes.dpdpf", data.unit_vectors);
      manifestFor(*cmd_gen_speech, dir, sl.seed);
      std::cout << "wrote " << data.features.size() << " utterances to "
                << gen_out << "\n";
    } else if (*cmd_gen_sym) {
      const SymbolicCorpusData data = generateSymbolic(sy);
      const fs::path dir(gen_sym_out);
      fs::create_directories(dir);
      writeSymbolCorpus(dir / "corpus.txt", data.corpus);
      writeAlignments(dir / "word_alignments.txt", data.word_alignments);
      manifestFor(*cmd_gen_sym, dir, sy.seed);
      std::cout << "wrote " << data.corpus.size() << " utterances to "
                << gen_sym_out << "\n";
    } else if (*cmd_oracle) {
      return runOracleCheck(oracle_instances, oracle_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
