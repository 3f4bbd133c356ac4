#include "dpdp/synthetic.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dpdp {

ZipfSampler::ZipfSampler(int n, double exponent) {
  if (n < 1) throw std::invalid_argument("zipf support must be nonempty");
  cdf_.resize(static_cast<size_t>(n));
  double total = 0.0;
  for (int r = 1; r <= n; ++r) {
    total += std::pow(static_cast<double>(r), -exponent);
    cdf_[static_cast<size_t>(r - 1)] = total;
  }
  for (double& c : cdf_) c /= total;
}

int ZipfSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double z = u(rng);
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), z);
  return static_cast<int>(it - cdf_.begin()) + 1;
}

namespace {

std::string wordLabel(int type_id) {
  std::ostringstream os;
  os << "w" << type_id;
  return os.str();
}

// Distinct random strings, lengths uniform in [min_len, max_len], symbols
// uniform over the alphabet.
std::vector<std::vector<int>> sampleLexicon(int lexicon_size, int alphabet,
                                            int min_len, int max_len,
                                            std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len_dist(min_len, max_len);
  std::uniform_int_distribution<int> sym_dist(1, alphabet);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> lexicon;
  int attempts = 0;
  while (static_cast<int>(lexicon.size()) < lexicon_size) {
    if (++attempts > lexicon_size * 1000)
      throw std::invalid_argument("lexicon config cannot yield enough distinct words");
    std::vector<int> word(static_cast<size_t>(len_dist(rng)));
    for (int& s : word) s = sym_dist(rng);
    if (seen.insert(word).second) lexicon.push_back(std::move(word));
  }
  return lexicon;
}

}  // namespace

SpeechlikeData generateSpeechlike(const SpeechlikeConfig& cfg) {
  if (cfg.feature_dim < cfg.unit_inventory)
    throw std::invalid_argument("feature_dim must be >= unit_inventory");
  if (cfg.min_word_units < 1 || cfg.max_word_units < cfg.min_word_units ||
      cfg.min_unit_frames < 1 || cfg.max_unit_frames < cfg.min_unit_frames ||
      cfg.min_words < 1 || cfg.max_words < cfg.min_words ||
      cfg.num_utterances < 1 || cfg.noise_sigma < 0.0)
    throw std::invalid_argument("invalid speechlike generator config");

  std::mt19937_64 rng(cfg.seed);
  SpeechlikeData data;

  // Mutually equidistant unit vectors: spacing/sqrt(2) along each axis gives
  // pairwise distance exactly code_spacing.
  data.unit_vectors =
      Eigen::MatrixXd::Zero(cfg.unit_inventory, cfg.feature_dim);
  for (int k = 0; k < cfg.unit_inventory; ++k)
    data.unit_vectors(k, k) = cfg.code_spacing / std::sqrt(2.0);

  data.lexicon = sampleLexicon(cfg.lexicon_size, cfg.unit_inventory,
                               cfg.min_word_units, cfg.max_word_units, rng);

  const ZipfSampler zipf(cfg.lexicon_size, cfg.zipf_exponent);
  std::uniform_int_distribution<int> words_dist(cfg.min_words, cfg.max_words);
  std::uniform_int_distribution<int> frames_dist(cfg.min_unit_frames,
                                                 cfg.max_unit_frames);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);

  for (int u = 0; u < cfg.num_utterances; ++u) {
    std::ostringstream id;
    id << "utt" << u;
    const int n_words = words_dist(rng);
    std::vector<int> unit_seq;
    std::vector<int> word_types;
    std::vector<size_t> word_unit_counts;
    for (int w = 0; w < n_words; ++w) {
      const int type = zipf.sample(rng);
      word_types.push_back(type);
      const std::vector<int>& word = data.lexicon[static_cast<size_t>(type - 1)];
      word_unit_counts.push_back(word.size());
      unit_seq.insert(unit_seq.end(), word.begin(), word.end());
    }

    std::vector<Index> unit_ends;
    Index total_frames = 0;
    for (size_t i = 0; i < unit_seq.size(); ++i) {
      total_frames += frames_dist(rng);
      unit_ends.push_back(total_frames);
    }

    FeatureSequence seq;
    seq.utterance_id = id.str();
    seq.frame_period_s = cfg.frame_period_s;
    seq.frames.resize(total_frames, cfg.feature_dim);
    Index frame = 0;
    for (size_t i = 0; i < unit_seq.size(); ++i) {
      const Eigen::RowVectorXd base =
          data.unit_vectors.row(unit_seq[i] - 1);
      for (; frame < unit_ends[i]; ++frame) {
        seq.frames.row(frame) = base;
        for (Index d = 0; d < cfg.feature_dim; ++d)
          seq.frames(frame, d) += noise(rng);
      }
    }

    ReferenceAlignment units;
    units.utterance_id = seq.utterance_id;
    double t0 = 0.0;
    for (size_t i = 0; i < unit_seq.size(); ++i) {
      const double t1 = static_cast<double>(unit_ends[i]) * cfg.frame_period_s;
      units.tokens.push_back({t0, t1, std::to_string(unit_seq[i])});
      t0 = t1;
    }

    ReferenceAlignment words;
    words.utterance_id = seq.utterance_id;
    t0 = 0.0;
    size_t unit_idx = 0;
    for (size_t w = 0; w < word_unit_counts.size(); ++w) {
      unit_idx += word_unit_counts[w];
      const double t1 =
          static_cast<double>(unit_ends[unit_idx - 1]) * cfg.frame_period_s;
      words.tokens.push_back({t0, t1, wordLabel(word_types[w])});
      t0 = t1;
    }

    data.features.push_back(std::move(seq));
    data.unit_alignments.push_back(std::move(units));
    data.word_alignments.push_back(std::move(words));
  }
  return data;
}

SymbolicCorpusData generateSymbolic(const SymbolicCorpusConfig& cfg) {
  if (cfg.min_word_len < 1 || cfg.max_word_len < cfg.min_word_len ||
      cfg.min_words < 1 || cfg.max_words < cfg.min_words ||
      cfg.num_utterances < 1 || cfg.alphabet_size < 1)
    throw std::invalid_argument("invalid symbolic generator config");

  std::mt19937_64 rng(cfg.seed);
  SymbolicCorpusData data;
  data.lexicon = sampleLexicon(cfg.lexicon_size, cfg.alphabet_size,
                               cfg.min_word_len, cfg.max_word_len, rng);

  const ZipfSampler zipf(cfg.lexicon_size, cfg.zipf_exponent);
  std::uniform_int_distribution<int> words_dist(cfg.min_words, cfg.max_words);
  for (int u = 0; u < cfg.num_utterances; ++u) {
    std::ostringstream id;
    id << "utt" << u;
    SymbolSequence seq;
    seq.utterance_id = id.str();
    seq.alphabet_size = cfg.alphabet_size;
    ReferenceAlignment words;
    words.utterance_id = seq.utterance_id;
    const int n_words = words_dist(rng);
    for (int w = 0; w < n_words; ++w) {
      const int type = zipf.sample(rng);
      const std::vector<int>& word = data.lexicon[static_cast<size_t>(type - 1)];
      const double start = static_cast<double>(seq.symbols.size());
      seq.symbols.insert(seq.symbols.end(), word.begin(), word.end());
      words.tokens.push_back({start, static_cast<double>(seq.symbols.size()),
                              wordLabel(type)});
    }
    data.corpus.push_back(std::move(seq));
    data.word_alignments.push_back(std::move(words));
  }
  return data;
}

}  // namespace dpdp
