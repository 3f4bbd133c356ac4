#include "dpdp/pipeline.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "dpdp/kmeans.hpp"
#include "dpdp/matrix_io.hpp"
#include "dpdp/parallel.hpp"
#include "dpdp/segmentation.hpp"

namespace dpdp {

namespace {

constexpr const char* kVersion = "dpdpseg 0.1.0";

[[noreturn]] void stageError(const std::string& stage, const std::string& what) {
  throw std::runtime_error("[" + stage + "] " + what);
}

std::vector<double> unitEndTimes(const UnitTokenization& units,
                                 double frame_period_s) {
  std::vector<double> out;
  out.reserve(units.boundaries.size());
  for (Index b : units.boundaries)
    out.push_back(static_cast<double>(b) * frame_period_s);
  return out;
}

}  // namespace

std::string PipelineConfig::canonicalText() const {
  std::ostringstream os;
  os << "features_dir " << features_dir.string() << "\n"
     << "codebook_path " << codebook_path.string() << "\n"
     << "alignments_path " << alignments_path.string() << "\n"
     << "output_dir " << output_dir.string() << "\n"
     << "unit_lambda " << unit_lambda << "\n"
     << "word_lambda " << word_lambda << "\n"
     << "kmeans_k " << kmeans_k << "\n"
     << "kmeans_iters " << kmeans_iters << "\n"
     << "aernn_preset " << aernn_preset << "\n"
     << "aernn_steps " << aernn_steps << "\n"
     << "aernn_batch_size " << aernn_batch_size << "\n"
     << "aernn_learning_rate " << aernn_learning_rate << "\n"
     << "word_variant " << word_variant << "\n"
     << "word_gamma_shape " << word_gamma_shape << "\n"
     << "word_gamma_scale " << word_gamma_scale << "\n"
     << "word_geom_prob " << word_geom_prob << "\n"
     << "seed " << seed << "\n"
     << "frame_period_s " << frame_period_s << "\n"
     << "tolerance_s " << tolerance_s << "\n"
     << "unit_max_seg_len " << unit_max_seg_len << "\n"
     << "word_max_seg_len " << word_max_seg_len << "\n"
     << "merge_baseline " << (merge_baseline ? 1 : 0) << "\n";
  return os.str();
}

TimedBoundarySet UtteranceWords::boundarySet() const {
  TimedBoundarySet set;
  set.utterance_id = utterance_id;
  set.terminal = terminal_s;
  for (size_t i = 0; i + 1 < words.size(); ++i)
    set.boundaries.push_back(words[i].end_s);
  return set;
}

namespace {

[[noreturn]] void rethrowWithUtterance(const std::string& id,
                                       const std::exception& e) {
  throw std::runtime_error("utterance " + id + ": " + e.what());
}

}  // namespace

std::vector<UnitTokenization> encodeCorpus(
    const std::vector<FeatureSequence>& features, const Codebook& codebook,
    double lambda, Index max_seg_len, int workers) {
  std::vector<UnitTokenization> units(features.size());
  parallelFor(static_cast<Index>(features.size()), workers, [&](Index i) {
    const FeatureSequence& f = features[static_cast<size_t>(i)];
    try {
      units[static_cast<size_t>(i)] =
          encodeUtterance(f, codebook, lambda, max_seg_len);
    } catch (const std::exception& e) {
      rethrowWithUtterance(f.utterance_id, e);
    }
  });
  return units;
}

std::vector<UnitTokenization> mergeCorpus(
    const std::vector<FeatureSequence>& features, const Codebook& codebook,
    int workers) {
  std::vector<UnitTokenization> units(features.size());
  parallelFor(static_cast<Index>(features.size()), workers, [&](Index i) {
    const FeatureSequence& f = features[static_cast<size_t>(i)];
    try {
      units[static_cast<size_t>(i)] =
          mergeRepeats(nearestCodes(f, codebook), f.utterance_id);
    } catch (const std::exception& e) {
      rethrowWithUtterance(f.utterance_id, e);
    }
  });
  return units;
}

std::vector<SymbolSequence> unitsToSymbols(
    const std::vector<UnitTokenization>& units, int alphabet_size) {
  std::vector<SymbolSequence> corpus;
  corpus.reserve(units.size());
  for (const UnitTokenization& u : units) {
    SymbolSequence seq;
    seq.utterance_id = u.utterance_id;
    seq.symbols = u.codes;
    seq.alphabet_size = alphabet_size;
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

std::vector<ReferenceAlignment> unitsToAlignments(
    const std::vector<UnitTokenization>& units,
    const std::vector<FeatureSequence>& features) {
  if (units.size() != features.size())
    throw std::invalid_argument("units/features count mismatch");
  std::vector<ReferenceAlignment> out;
  out.reserve(units.size());
  for (size_t i = 0; i < units.size(); ++i) {
    ReferenceAlignment a;
    a.utterance_id = units[i].utterance_id;
    double t0 = 0.0;
    for (size_t k = 0; k < units[i].codes.size(); ++k) {
      const double t1 = static_cast<double>(units[i].boundaries[k]) *
                        features[i].frame_period_s;
      a.tokens.push_back({t0, t1, std::to_string(units[i].codes[k])});
      t0 = t1;
    }
    out.push_back(std::move(a));
  }
  return out;
}

void writeRunManifest(const std::filesystem::path& path,
                      const std::string& subcommand,
                      const std::string& config_text, uint64_t seed) {
  std::map<std::string, std::string> manifest;
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = std::to_string(seed);
  manifest["config_hash"] = std::to_string(fnv1a(config_text));
  writeManifest(path, manifest);
}

PipelineResult runPipeline(const PipelineConfig& cfg) {
  // Referenced paths must exist before any stage starts.
  if (!std::filesystem::is_directory(cfg.features_dir))
    stageError("features", "not a directory: " + cfg.features_dir.string());
  if (!cfg.codebook_path.empty() && !std::filesystem::exists(cfg.codebook_path))
    stageError("kmeans", "codebook not found: " + cfg.codebook_path.string());
  if (!cfg.alignments_path.empty() &&
      !std::filesystem::exists(cfg.alignments_path))
    stageError("eval", "alignments not found: " + cfg.alignments_path.string());
  std::filesystem::create_directories(cfg.output_dir);

  // Stage: features.
  std::vector<FeatureSequence> features;
  try {
    features = readFeatureDir(cfg.features_dir, cfg.frame_period_s);
  } catch (const std::exception& e) {
    stageError("features", e.what());
  }

  // Stage: codebook (fit here unless one is supplied), then reload from disk.
  const std::filesystem::path codebook_file =
      cfg.codebook_path.empty() ? cfg.output_dir / "codebook.dpdpf"
                                : cfg.codebook_path;
  try {
    if (cfg.codebook_path.empty()) {
      const KmeansResult km =
          kmeansFit(features, cfg.kmeans_k, cfg.kmeans_iters, cfg.seed);
      writeCodebook(codebook_file, km.codebook);
    }
  } catch (const std::exception& e) {
    stageError("kmeans", e.what());
  }
  Codebook codebook = readCodebook(codebook_file);

  // Stage: unit discovery.
  std::vector<UnitTokenization> units;
  try {
    units = cfg.merge_baseline
                ? mergeCorpus(features, codebook, cfg.workers)
                : encodeCorpus(features, codebook, cfg.unit_lambda,
                               cfg.unit_max_seg_len, cfg.workers);
    writeSymbolCorpus(cfg.output_dir / "units.txt",
                      unitsToSymbols(units, static_cast<int>(codebook.size())));
    writeAlignments(cfg.output_dir / "unit_alignments.txt",
                    unitsToAlignments(units, features));
  } catch (const std::exception& e) {
    stageError("encode", e.what());
  }

  // Stage: AE-RNN training on the persisted unit corpus.
  std::vector<SymbolSequence> unit_corpus =
      readSymbolCorpus(cfg.output_dir / "units.txt");
  for (SymbolSequence& s : unit_corpus)
    s.alphabet_size = static_cast<int>(codebook.size());
  const std::filesystem::path model_dir = cfg.output_dir / "aernn";
  try {
    AernnHyper hyper =
        cfg.aernn_preset == "phonemic"
            ? AernnHyper::phonemic(static_cast<int>(codebook.size()))
            : AernnHyper::chainedSpeech(static_cast<int>(codebook.size()));
    hyper.steps = cfg.aernn_steps;
    hyper.batch_size = cfg.aernn_batch_size;
    hyper.learning_rate = cfg.aernn_learning_rate;
    const AernnScorer scorer = trainAernn(unit_corpus, hyper, cfg.seed);
    saveScorer(model_dir, scorer);
  } catch (const std::exception& e) {
    stageError("train-aernn", e.what());
  }
  const AernnScorer scorer = loadScorer(model_dir);

  // Stage: word segmentation over units, boundaries snapped to unit end
  // times.
  PipelineResult result;
  result.words.utterances.resize(units.size());
  SymbolicSegConfig seg_config =
      cfg.word_variant == "hsmm"
          ? SymbolicSegConfig::hsmm(cfg.word_gamma_shape, cfg.word_gamma_scale,
                                    50, cfg.word_geom_prob)
          : SymbolicSegConfig::linear(cfg.word_lambda);
  seg_config.max_seg_len = cfg.word_max_seg_len;
  try {
    parallelFor(static_cast<Index>(units.size()), cfg.workers, [&](Index i) {
      const UnitTokenization& u = units[static_cast<size_t>(i)];
      const SymbolSequence& seq = unit_corpus[static_cast<size_t>(i)];
      UtteranceWords& out = result.words.utterances[static_cast<size_t>(i)];
      out.utterance_id = u.utterance_id;
      out.unit_end_times_s =
          unitEndTimes(u, features[static_cast<size_t>(i)].frame_period_s);
      out.terminal_s = out.unit_end_times_s.back();
      Segmentation seg;
      try {
        seg = segmentSymbols(scorer, seq, seg_config);
      } catch (const std::exception& e) {
        rethrowWithUtterance(u.utterance_id, e);
      }
      for (const Span& span : seg.spans) {
        WordSpanOut w;
        w.unit_start = span.start;
        w.unit_end = span.end;
        w.codes.assign(u.codes.begin() + (span.start - 1),
                       u.codes.begin() + span.end);
        w.start_s = span.start == 1
                        ? 0.0
                        : out.unit_end_times_s[static_cast<size_t>(span.start) - 2];
        w.end_s = out.unit_end_times_s[static_cast<size_t>(span.end) - 1];
        out.words.push_back(std::move(w));
      }
    });
  } catch (const std::exception& e) {
    stageError("segment-words", e.what());
  }

  // Persist word-level outputs.
  {
    std::ostringstream tsv;
    tsv.precision(9);
    std::vector<ReferenceAlignment> hyp_alignments;
    for (const UtteranceWords& u : result.words.utterances) {
      ReferenceAlignment a;
      a.utterance_id = u.utterance_id;
      for (const WordSpanOut& w : u.words) {
        tsv << u.utterance_id << '\t' << w.unit_start << '\t' << w.unit_end
            << '\t' << w.start_s << '\t' << w.end_s << '\t';
        for (size_t c = 0; c < w.codes.size(); ++c) {
          if (c) tsv << ' ';
          tsv << w.codes[c];
        }
        tsv << '\n';
        std::string label;
        for (size_t c = 0; c < w.codes.size(); ++c)
          label += (c ? "_" : "") + std::to_string(w.codes[c]);
        a.tokens.push_back({w.start_s, w.end_s, label});
      }
      hyp_alignments.push_back(std::move(a));
    }
    atomicWriteText(cfg.output_dir / "words.tsv", tsv.str());
    writeAlignments(cfg.output_dir / "word_alignments.txt", hyp_alignments);
  }

  // Stage: evaluation, when references exist.
  if (!cfg.alignments_path.empty()) {
    try {
      const std::vector<ReferenceAlignment> refs =
          readAlignments(cfg.alignments_path);
      std::map<std::string, const ReferenceAlignment*> by_id;
      for (const ReferenceAlignment& r : refs) by_id[r.utterance_id] = &r;
      MetricAccumulator acc({cfg.tolerance_s, false});
      for (const UtteranceWords& u : result.words.utterances) {
        const auto it = by_id.find(u.utterance_id);
        if (it == by_id.end())
          throw std::runtime_error("no reference alignment for utterance " +
                                   u.utterance_id);
        acc.add(u.boundarySet(), *it->second);
      }
      result.report = acc.report();
      result.metrics_path = cfg.output_dir / "metrics.txt";
      atomicWriteText(result.metrics_path, formatReport(*result.report) + "\n" +
                                               formatKeyValues(*result.report));
    } catch (const std::exception& e) {
      stageError("eval", e.what());
    }
  }

  writeRunManifest(cfg.output_dir / "run_manifest.txt", "pipeline",
                   cfg.canonicalText(), cfg.seed);
  return result;
}

}  // namespace dpdp
