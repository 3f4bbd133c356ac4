#include "dpdp/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpdp {

namespace {

constexpr char kMagic[6] = {'D', 'P', 'D', 'P', 'F', '\0'};

void writeU32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8 & 0xff),
                        static_cast<unsigned char>(v >> 16 & 0xff),
                        static_cast<unsigned char>(v >> 24 & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t readU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

std::string utteranceIdFromPath(const std::filesystem::path& path) {
  return path.stem().string();
}

}  // namespace

void writeMatrix(const std::filesystem::path& path,
                 const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for write: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    writeU32(os, static_cast<uint32_t>(m.rows()));
    writeU32(os, static_cast<uint32_t>(m.cols()));
    // Row-major f32 payload.
    std::vector<float> row(static_cast<size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        row[static_cast<size_t>(c)] = static_cast<float>(m(r, c));
      os.write(reinterpret_cast<const char*>(row.data()),
               static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

bool hasMatrixMagic(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  char head[6] = {};
  is.read(head, 6);
  return is && std::memcmp(head, kMagic, 6) == 0;
}

Eigen::MatrixXd readMatrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  char head[6];
  is.read(head, 6);
  if (!is || std::memcmp(head, kMagic, 6) != 0)
    throw std::runtime_error("bad matrix magic in " + path.string());
  const uint32_t rows = readU32(is), cols = readU32(is);
  Eigen::MatrixXd m(rows, cols);
  std::vector<float> row(cols);
  for (uint32_t r = 0; r < rows; ++r) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!is) throw std::runtime_error("truncated matrix file: " + path.string());
    for (uint32_t c = 0; c < cols; ++c) m(r, c) = static_cast<double>(row[c]);
  }
  return m;
}

namespace {

Eigen::MatrixXd readCsvMatrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty feature file: " + path.string());
  const size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw std::runtime_error("ragged CSV row in " + path.string());
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

}  // namespace

FeatureSequence readFeatureFile(const std::filesystem::path& path,
                                double frame_period_s) {
  FeatureSequence seq;
  seq.frames = hasMatrixMagic(path) ? readMatrix(path) : readCsvMatrix(path);
  seq.frame_period_s = frame_period_s;
  seq.utterance_id = utteranceIdFromPath(path);
  validate(seq);
  return seq;
}

std::vector<FeatureSequence> readFeatureDir(const std::filesystem::path& dir,
                                            double frame_period_s) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".dpdpf" || ext == ".csv") paths.push_back(entry.path());
  }
  if (paths.empty())
    throw std::runtime_error("no feature files in " + dir.string());
  std::sort(paths.begin(), paths.end());
  std::vector<FeatureSequence> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(readFeatureFile(p, frame_period_s));
  return out;
}

void writeCodebook(const std::filesystem::path& path, const Codebook& codebook) {
  writeMatrix(path, codebook.codes);
}

Codebook readCodebook(const std::filesystem::path& path) {
  Codebook cb;
  cb.codes = readMatrix(path);
  cb.trained_on = path.string();
  return cb;
}

std::vector<SymbolSequence> readSymbolCorpus(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::vector<SymbolSequence> corpus;
  std::string line;
  int max_symbol = 0;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    SymbolSequence seq;
    std::string body = line;
    const size_t tab = line.find('\t');
    if (tab != std::string::npos) {
      seq.utterance_id = line.substr(0, tab);
      body = line.substr(tab + 1);
    } else {
      std::ostringstream id;
      id << "line" << line_no;
      seq.utterance_id = id.str();
    }
    std::istringstream ls(body);
    int s;
    while (ls >> s) seq.symbols.push_back(s);
    if (seq.symbols.empty()) continue;
    for (int sym : seq.symbols) {
      if (sym < 1)
        throw std::runtime_error("symbol below 1 in " + path.string());
      max_symbol = std::max(max_symbol, sym);
    }
    corpus.push_back(std::move(seq));
  }
  for (auto& seq : corpus) seq.alphabet_size = max_symbol;
  return corpus;
}

void writeSymbolCorpus(const std::filesystem::path& path,
                       const std::vector<SymbolSequence>& corpus) {
  std::ostringstream os;
  for (const SymbolSequence& seq : corpus) {
    os << seq.utterance_id << '\t';
    for (size_t i = 0; i < seq.symbols.size(); ++i) {
      if (i) os << ' ';
      os << seq.symbols[i];
    }
    os << '\n';
  }
  atomicWriteText(path, os.str());
}

std::vector<ReferenceAlignment> readAlignments(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::map<std::string, ReferenceAlignment> by_utt;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string id, label;
    double start, end;
    if (!(ls >> id >> start >> end >> label))
      throw std::runtime_error("bad alignment line: " + line);
    auto [it, inserted] = by_utt.try_emplace(id);
    if (inserted) {
      it->second.utterance_id = id;
      order.push_back(id);
    }
    it->second.tokens.push_back({start, end, label});
  }
  std::vector<ReferenceAlignment> out;
  out.reserve(order.size());
  for (const std::string& id : order) {
    ReferenceAlignment& a = by_utt[id];
    std::sort(a.tokens.begin(), a.tokens.end(),
              [](const RefToken& x, const RefToken& y) { return x.start < y.start; });
    for (size_t i = 0; i < a.tokens.size(); ++i) {
      if (a.tokens[i].end <= a.tokens[i].start)
        throw std::runtime_error("empty token in alignment for " + id);
      if (i > 0 && a.tokens[i].start < a.tokens[i - 1].end - 1e-9)
        throw std::runtime_error("overlapping tokens in alignment for " + id);
    }
    out.push_back(std::move(a));
  }
  return out;
}

void writeAlignments(const std::filesystem::path& path,
                     const std::vector<ReferenceAlignment>& alignments) {
  std::ostringstream os;
  os.precision(9);
  for (const ReferenceAlignment& a : alignments)
    for (const RefToken& t : a.tokens)
      os << a.utterance_id << ' ' << t.start << ' ' << t.end << ' ' << t.label
         << '\n';
  atomicWriteText(path, os.str());
}

void writeManifest(const std::filesystem::path& path,
                   const std::map<std::string, std::string>& entries) {
  std::ostringstream os;
  for (const auto& [k, v] : entries) os << k << ' ' << v << '\n';
  atomicWriteText(path, os.str());
}

std::map<std::string, std::string> readManifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t sp = line.find(' ');
    if (sp == std::string::npos)
      entries[line] = "";
    else
      entries[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return entries;
}

void atomicWriteText(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for write: " + path.string());
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace dpdp
