#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dpdp/features.hpp"
#include "dpdp/metrics.hpp"

namespace dpdp {

// Binary matrix format: magic "DPDPF\0", u32 rows, u32 cols (little-endian),
// then rows*cols little-endian 32-bit floats, row-major.
void writeMatrix(const std::filesystem::path& path,
                 const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd readMatrix(const std::filesystem::path& path);
bool hasMatrixMagic(const std::filesystem::path& path);

// Feature ingestion: DPDPF if the magic matches, otherwise plain-text CSV
// with one frame per line (comma or whitespace separated).
FeatureSequence readFeatureFile(const std::filesystem::path& path,
                                double frame_period_s);
// All feature files (*.dpdpf, *.csv) in a directory, sorted by utterance id.
std::vector<FeatureSequence> readFeatureDir(const std::filesystem::path& dir,
                                            double frame_period_s);

void writeCodebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook readCodebook(const std::filesystem::path& path);

// Symbol corpus text: one utterance per line, whitespace-separated integer
// symbols, optional leading "utterance_id<TAB>".
std::vector<SymbolSequence> readSymbolCorpus(const std::filesystem::path& path);
void writeSymbolCorpus(const std::filesystem::path& path,
                       const std::vector<SymbolSequence>& corpus);

// Alignment text: "utterance_id start end label" per line, grouped by
// utterance and sorted by start time.
std::vector<ReferenceAlignment> readAlignments(const std::filesystem::path& path);
void writeAlignments(const std::filesystem::path& path,
                     const std::vector<ReferenceAlignment>& alignments);

// Plain key-value manifest, one "key value" per line, keys sorted on write.
void writeManifest(const std::filesystem::path& path,
                   const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> readManifest(const std::filesystem::path& path);

// Write-then-rename so partial stage outputs never appear under their
// final name.
void atomicWriteText(const std::filesystem::path& path, const std::string& text);

uint64_t fnv1a(const std::string& bytes);

}  // namespace dpdp
