#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dpdp/matrix_io.hpp"

using namespace dpdp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dpdp_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("matrix format: header bytes and float round trip") {
  TempDir tmp;
  const fs::path file = tmp.path / "m.dpdpf";
  Eigen::MatrixXd m(2, 3);
  m << 1.25, -2.5, 3.0e-3, 4.0, 5.5, -6.75;
  writeMatrix(file, m);

  std::ifstream is(file, std::ios::binary);
  char head[14];
  is.read(head, 14);
  CHECK(std::string(head, 5) == "DPDPF");
  CHECK(head[5] == '\0');
  // Little-endian u32 dims.
  CHECK(static_cast<unsigned char>(head[6]) == 2);
  CHECK(static_cast<unsigned char>(head[7]) == 0);
  CHECK(static_cast<unsigned char>(head[10]) == 3);

  const Eigen::MatrixXd back = readMatrix(file);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (Index r = 0; r < 2; ++r)
    for (Index c = 0; c < 3; ++c)
      CHECK(back(r, c) == doctest::Approx(m(r, c)).epsilon(1e-6));
  CHECK(hasMatrixMagic(file));
}

TEST_CASE("matrix format: exact values survive when f32-representable") {
  TempDir tmp;
  const fs::path file = tmp.path / "m.dpdpf";
  Eigen::MatrixXd m(1, 4);
  m << 1.0, 0.5, -0.25, 1024.0;
  writeMatrix(file, m);
  const Eigen::MatrixXd back = readMatrix(file);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv fallback ingestion") {
  TempDir tmp;
  const fs::path file = tmp.path / "utt1.csv";
  std::ofstream(file) << "1.0,2.0,3.0\n4.0 5.0 6.0\n";
  const FeatureSequence seq = readFeatureFile(file, 0.01);
  CHECK(seq.utterance_id == "utt1");
  REQUIRE(seq.frames.rows() == 2);
  CHECK(seq.frames(1, 2) == 6.0);
}

TEST_CASE("feature directory is sorted by utterance id") {
  TempDir tmp;
  writeMatrix(tmp.path / "b.dpdpf", Eigen::MatrixXd::Ones(2, 2));
  writeMatrix(tmp.path / "a.dpdpf", Eigen::MatrixXd::Zero(3, 2));
  const auto seqs = readFeatureDir(tmp.path, 0.02);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].utterance_id == "a");
  CHECK(seqs[1].utterance_id == "b");
  CHECK(seqs[0].frame_period_s == 0.02);
}

TEST_CASE("symbol corpus round trip is exact") {
  TempDir tmp;
  const fs::path file = tmp.path / "corpus.txt";
  std::vector<SymbolSequence> corpus(2);
  corpus[0].utterance_id = "u1";
  corpus[0].symbols = {1, 5, 2, 2};
  corpus[1].utterance_id = "u2";
  corpus[1].symbols = {3};
  writeSymbolCorpus(file, corpus);
  const auto back = readSymbolCorpus(file);
  REQUIRE(back.size() == 2);
  CHECK(back[0].utterance_id == "u1");
  CHECK(back[0].symbols == corpus[0].symbols);
  CHECK(back[1].symbols == corpus[1].symbols);
  CHECK(back[0].alphabet_size == 5);
}

TEST_CASE("symbol corpus without ids gets line ids") {
  TempDir tmp;
  const fs::path file = tmp.path / "corpus.txt";
  std::ofstream(file) << "1 2 3\n4 5\n";
  const auto corpus = readSymbolCorpus(file);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].utterance_id == "line1");
  CHECK(corpus[1].symbols == std::vector<int>{4, 5});
}

TEST_CASE("alignment round trip groups and sorts tokens") {
  TempDir tmp;
  const fs::path file = tmp.path / "ali.txt";
  std::ofstream(file) << "u2 0.0 0.5 hello\n"
                      << "u1 0.4 0.9 b\n"
                      << "u1 0.0 0.4 a\n";
  const auto alis = readAlignments(file);
  REQUIRE(alis.size() == 2);
  CHECK(alis[0].utterance_id == "u2");
  CHECK(alis[1].tokens[0].label == "a");
  CHECK(alis[1].tokens[1].label == "b");
  CHECK(alis[1].terminal() == doctest::Approx(0.9));

  writeAlignments(tmp.path / "out.txt", alis);
  const auto back = readAlignments(tmp.path / "out.txt");
  CHECK(back.size() == 2);
  CHECK(back[1].tokens[1].end == doctest::Approx(0.9));
}

TEST_CASE("overlapping alignment tokens are rejected") {
  TempDir tmp;
  const fs::path file = tmp.path / "bad.txt";
  std::ofstream(file) << "u 0.0 0.6 a\nu 0.5 1.0 b\n";
  CHECK_THROWS(readAlignments(file));
}

TEST_CASE("manifest round trip") {
  TempDir tmp;
  writeManifest(tmp.path / "manifest.txt", {{"seed", "42"}, {"k", "50"}});
  const auto back = readManifest(tmp.path / "manifest.txt");
  CHECK(back.at("seed") == "42");
  CHECK(back.at("k") == "50");
}

TEST_CASE("atomic write leaves no temp file") {
  TempDir tmp;
  atomicWriteText(tmp.path / "x.txt", "data\n");
  CHECK(fs::exists(tmp.path / "x.txt"));
  CHECK(!fs::exists(tmp.path / "x.txt.tmp"));
}
