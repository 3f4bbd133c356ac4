#include "dpdp/features.hpp"

#include <stdexcept>

namespace dpdp {

Segmentation UnitTokenization::segmentation() const {
  Segmentation seg;
  Index start = 1;
  for (Index b : boundaries) {
    seg.spans.push_back({start, b});
    start = b + 1;
  }
  return seg;
}

void validate(const FeatureSequence& seq) {
  if (seq.frames.rows() < 1 || seq.frames.cols() < 1)
    throw std::invalid_argument("empty input");
  if (!seq.frames.allFinite())
    throw std::invalid_argument("non-finite features in " + seq.utterance_id);
  if (seq.frame_period_s <= 0.0)
    throw std::invalid_argument("frame period must be positive");
}

void validate(const Codebook& codebook) {
  if (codebook.codes.rows() < 1 || codebook.codes.cols() < 1)
    throw std::invalid_argument("empty codebook");
  if (!codebook.codes.allFinite())
    throw std::invalid_argument("non-finite codebook entries");
  for (Index a = 0; a < codebook.codes.rows(); ++a)
    for (Index b = a + 1; b < codebook.codes.rows(); ++b)
      if ((codebook.codes.row(a) - codebook.codes.row(b)).squaredNorm() == 0.0)
        throw std::invalid_argument("duplicate code rows " + std::to_string(a + 1) +
                                    " and " + std::to_string(b + 1));
}

void validate(const UnitTokenization& units, Index n_frames) {
  if (units.codes.size() != units.boundaries.size())
    throw std::invalid_argument("code/boundary count mismatch");
  if (units.boundaries.empty() || units.boundaries.back() != n_frames)
    throw std::invalid_argument("boundaries must end at the final frame");
  Index prev = 0;
  for (Index b : units.boundaries) {
    if (b <= prev) throw std::invalid_argument("boundaries must increase");
    prev = b;
  }
}

void validate(const SymbolSequence& seq) {
  if (seq.symbols.empty()) throw std::invalid_argument("empty input");
  for (int s : seq.symbols)
    if (s < 1 || s > seq.alphabet_size)
      throw std::invalid_argument("symbol outside alphabet in " +
                                  seq.utterance_id);
}

}  // namespace dpdp
