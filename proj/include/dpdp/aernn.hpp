#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dpdp/features.hpp"
#include "dpdp/gru.hpp"

namespace dpdp {

// Autoencoding recurrent network: an embedding layer, a GRU encoder whose
// final hidden state is projected to a latent bottleneck, and a GRU decoder
// initialized from the latent that reconstructs the input under teacher
// forcing.  Segment cost is the reconstruction negative log likelihood.
struct AernnHyper {
  int alphabet_size = 0;
  int embedding_dim = 10;
  int encoder_dim = 500;
  int encoder_layers = 1;
  int latent_dim = 50;
  int decoder_dim = 500;
  // Append an end-of-segment target so segment length is decodable; its NLL
  // term is part of the segment cost.
  bool append_eos = true;

  int steps = 1500;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double init_range = 0.08;

  // 10-d embedding, 1x500 encoder, 50-d latent, 1x500 decoder.
  static AernnHyper chainedSpeech(int alphabet_size);
  // 3x200 encoder, 25-d latent, 1x200 decoder.
  static AernnHyper phonemic(int alphabet_size);

  int numClasses() const { return alphabet_size + (append_eos ? 1 : 0); }
  int bosRow() const { return alphabet_size; }    // embedding row of the start symbol
  int eosClass() const { return alphabet_size; }  // output class of the end marker
};

struct AernnParams {
  Eigen::MatrixXd embedding;  // (alphabet_size + 1) x embedding_dim
  std::vector<GruLayerParams> encoder;
  GruLayerParams decoder;
  Eigen::MatrixXd w_latent, b_latent;      // latent x enc, 1 x latent
  Eigen::MatrixXd w_dec_init, b_dec_init;  // dec x latent, 1 x dec
  Eigen::MatrixXd w_out, b_out;            // classes x dec, 1 x classes
};

// Stable tensor enumeration used by the optimizer, serialization, and the
// finite-difference check.
void visitTensors(AernnParams& params,
                  const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
void visitTensors(const AernnParams& params,
                  const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn);

// Weights uniform in [-init_range, init_range], biases zero, seeded.
AernnParams makeParams(const AernnHyper& hyper, uint64_t seed);
AernnParams zeroParams(const AernnHyper& hyper);

struct TrainMeta {
  uint64_t seed = 0;
  int steps_run = 0;
  double initial_loss = 0.0;  // mean per-utterance NLL before training
  double final_loss = 0.0;    // same after training
  std::vector<double> step_losses;
};

struct AernnScorer {
  AernnHyper hyper;
  AernnParams params;
  TrainMeta meta;
};

// Mean per-sequence reconstruction NLL of a batch; fills grads when given.
// Sequences hold 1-based symbols.
double aernnLossAndGrad(const AernnHyper& hyper, const AernnParams& params,
                        const std::vector<const std::vector<int>*>& batch,
                        AernnParams* grads);

// Teacher-forced training on complete utterances with adaptive-moment
// updates; the scorer is frozen afterwards.
AernnScorer trainAernn(const std::vector<SymbolSequence>& corpus,
                       const AernnHyper& hyper, uint64_t seed);

// Reconstruction NLL of one span (plain single-sequence forward pass).
// Optionally reports the per-position NLL terms.
double aernnSpanNll(const AernnHyper& hyper, const AernnParams& params,
                    const std::vector<int>& span,
                    std::vector<double>* per_position = nullptr);

// w_seg for every admissible span of one utterance: entry (a-1, l-1) is the
// cost of the span starting at a (1-based) with length l; infinity where the
// span runs past the end.  Spans of the same length are scored as one batch.
Eigen::MatrixXd aernnSpanCosts(const AernnScorer& scorer,
                               const std::vector<int>& symbols,
                               Index max_seg_len);

// Spans longer than max_seg_len cost infinity, consistent with the duration
// truncation.
double aernnSegmentCost(const AernnScorer& scorer, const SymbolSequence& seq,
                        Index a, Index b,
                        std::vector<double>* per_position = nullptr,
                        Index max_seg_len = 50);

// Teacher-forced decoder output distributions for one span, one row per
// decode position; rows are softmax outputs over the symbol classes.
Eigen::MatrixXd decoderDistributions(const AernnHyper& hyper,
                                     const AernnParams& params,
                                     const std::vector<int>& span);

// Exact reconstruction accuracy under teacher forcing (argmax per position).
double reconstructionAccuracy(const AernnScorer& scorer,
                              const std::vector<SymbolSequence>& corpus);

uint64_t parameterHash(const AernnParams& params);

void saveScorer(const std::filesystem::path& dir, const AernnScorer& scorer);
AernnScorer loadScorer(const std::filesystem::path& dir);

}  // namespace dpdp
