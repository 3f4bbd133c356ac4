#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "dpdp/segmentation.hpp"

namespace dpdp {

// T x D matrix of continuous frame features.  Frame t (1-based) covers the
// time interval [(t-1) * frame_period_s, t * frame_period_s).
struct FeatureSequence {
  Eigen::MatrixXd frames;
  double frame_period_s = 0.01;
  std::string utterance_id;

  Index length() const { return frames.rows(); }
  Index dim() const { return frames.cols(); }
};

// K x D matrix of code vectors {e_k}.  Code ids are 1-based.
struct Codebook {
  Eigen::MatrixXd codes;
  std::string trained_on;

  Index size() const { return codes.rows(); }
  Index dim() const { return codes.cols(); }
};

// Variable-rate encoding of one utterance: one code per unit, with the end
// frame of each unit.  Implied spans cover frames 1..T exactly.
struct UnitTokenization {
  std::vector<int> codes;         // in [1, K]
  std::vector<Index> boundaries;  // strictly increasing, last == T
  std::string utterance_id;

  Index size() const { return static_cast<Index>(codes.size()); }
  Segmentation segmentation() const;
};

// Discrete symbol sequence over an alphabet {1..alphabet_size}.
struct SymbolSequence {
  std::vector<int> symbols;
  std::string utterance_id;
  int alphabet_size = 0;

  Index length() const { return static_cast<Index>(symbols.size()); }
};

void validate(const FeatureSequence& seq);
void validate(const Codebook& codebook);  // no duplicate code rows
void validate(const UnitTokenization& units, Index n_frames);
void validate(const SymbolSequence& seq);

}  // namespace dpdp
