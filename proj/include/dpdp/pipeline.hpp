#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dpdp/aernn.hpp"
#include "dpdp/features.hpp"
#include "dpdp/metrics.hpp"
#include "dpdp/symbolic.hpp"
#include "dpdp/vq.hpp"

namespace dpdp {

// Chained system: features -> codebook -> DPDP unit discovery -> unit-symbol
// corpus -> AE-RNN -> DPDP word segmentation -> time-mapped word boundaries
// -> evaluation.  Each stage persists its artifact and the next stage reads
// it back, so stage reruns reproduce downstream outputs exactly.
struct PipelineConfig {
  std::filesystem::path features_dir;
  std::filesystem::path codebook_path;    // empty: fit K-means here
  std::filesystem::path alignments_path;  // empty: skip evaluation
  std::filesystem::path output_dir;

  double unit_lambda = kDefaultUnitLambda;
  double word_lambda = kDefaultWordLambda;
  Index kmeans_k = 50;
  int kmeans_iters = 50;
  // "chained" (1x500, 50-d latent) or "phonemic" (3x200, 25-d latent).
  std::string aernn_preset = "chained";
  int aernn_steps = 1500;
  int aernn_batch_size = 32;
  double aernn_learning_rate = 1e-3;
  std::string word_variant = "linear";  // or "hsmm"
  double word_gamma_shape = 7.0;
  double word_gamma_scale = 1.0;
  double word_geom_prob = 0.95;
  uint64_t seed = 0;
  double frame_period_s = 0.01;
  double tolerance_s = 0.02;
  Index unit_max_seg_len = kDefaultUnitMaxSegLen;
  Index word_max_seg_len = kDefaultSymbolMaxSegLen;
  int workers = 0;  // 0: hardware concurrency
  // Replace DPDP unit discovery with per-frame assignment plus run-length
  // merging (the no-DP baseline row).
  bool merge_baseline = false;

  std::string canonicalText() const;
};

struct WordSpanOut {
  Index unit_start = 0, unit_end = 0;  // 1-based unit indices
  std::vector<int> codes;
  double start_s = 0.0, end_s = 0.0;
};

struct UtteranceWords {
  std::string utterance_id;
  double terminal_s = 0.0;
  std::vector<WordSpanOut> words;
  std::vector<double> unit_end_times_s;

  TimedBoundarySet boundarySet() const;
};

struct WordSegmentationOutput {
  std::vector<UtteranceWords> utterances;
};

struct PipelineResult {
  WordSegmentationOutput words;
  std::optional<MetricReport> report;
  std::filesystem::path metrics_path;
};

PipelineResult runPipeline(const PipelineConfig& config);

// Stage helpers shared with the CLI.
std::vector<UnitTokenization> encodeCorpus(
    const std::vector<FeatureSequence>& features, const Codebook& codebook,
    double lambda, Index max_seg_len, int workers);
std::vector<UnitTokenization> mergeCorpus(
    const std::vector<FeatureSequence>& features, const Codebook& codebook,
    int workers);
std::vector<SymbolSequence> unitsToSymbols(
    const std::vector<UnitTokenization>& units, int alphabet_size);
std::vector<ReferenceAlignment> unitsToAlignments(
    const std::vector<UnitTokenization>& units,
    const std::vector<FeatureSequence>& features);

void writeRunManifest(const std::filesystem::path& path,
                      const std::string& subcommand,
                      const std::string& config_text, uint64_t seed);

}  // namespace dpdp
