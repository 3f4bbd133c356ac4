#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dpdp/features.hpp"
#include "dpdp/metrics.hpp"

namespace dpdp {

// Speech-like generator: a lexicon of unit-index strings is sampled, then
// utterances are rendered by repeating each unit's code vector for a random
// number of frames and adding Gaussian noise.  Unit vectors are mutually
// equidistant (scaled coordinate axes), so code confusability is set by
// code_spacing alone.
struct SpeechlikeConfig {
  int lexicon_size = 30;
  int min_word_units = 2;
  int max_word_units = 3;
  int unit_inventory = 50;
  int feature_dim = 50;  // must be >= unit_inventory
  double code_spacing = 0.3;
  int min_unit_frames = 5;
  int max_unit_frames = 20;
  double zipf_exponent = 1.0;
  double noise_sigma = 0.05;
  int num_utterances = 100;
  int min_words = 2;
  int max_words = 5;
  double frame_period_s = 0.01;
  uint64_t seed = 0;
};

struct SpeechlikeData {
  std::vector<FeatureSequence> features;
  std::vector<ReferenceAlignment> word_alignments;  // seconds, labels w###
  std::vector<ReferenceAlignment> unit_alignments;  // seconds, labels = code id
  Eigen::MatrixXd unit_vectors;                     // inventory x dim
  std::vector<std::vector<int>> lexicon;            // unit strings, 1-based
};

SpeechlikeData generateSpeechlike(const SpeechlikeConfig& config);

// Symbolic generator: same lexicon-and-concatenate scheme over a discrete
// alphabet, with word boundaries in symbol positions.
struct SymbolicCorpusConfig {
  int lexicon_size = 50;
  int alphabet_size = 30;
  int min_word_len = 2;
  int max_word_len = 8;
  double zipf_exponent = 1.0;
  int num_utterances = 5000;
  int min_words = 2;
  int max_words = 5;
  uint64_t seed = 0;
};

struct SymbolicCorpusData {
  std::vector<SymbolSequence> corpus;
  std::vector<ReferenceAlignment> word_alignments;  // symbol positions
  std::vector<std::vector<int>> lexicon;
};

SymbolicCorpusData generateSymbolic(const SymbolicCorpusConfig& config);

// Zipf sampler over ranks 1..n: P(r) proportional to r^(-exponent).
class ZipfSampler {
 public:
  ZipfSampler(int n, double exponent);
  int sample(std::mt19937_64& rng) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace dpdp
