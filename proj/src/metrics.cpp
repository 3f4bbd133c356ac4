#include "dpdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dpdp {

namespace {

constexpr double kEdgeEps = 1e-9;

// Boundary list for matching under the edge policy.  A leading 0 is added
// and the terminal kept when edges are included; otherwise entries at the
// terminal are stripped.
std::vector<double> scoringBoundaries(const TimedBoundarySet& set,
                                      bool include_edges) {
  std::vector<double> out;
  if (include_edges) out.push_back(0.0);
  for (double b : set.boundaries) {
    const bool at_end = std::abs(b - set.terminal) < kEdgeEps;
    if (at_end && !include_edges) continue;
    out.push_back(b);
  }
  if (include_edges &&
      (out.empty() || std::abs(out.back() - set.terminal) >= kEdgeEps))
    out.push_back(set.terminal);
  return out;
}

long matchCount(const std::vector<double>& hyp, const std::vector<double>& ref,
                double tol) {
  struct Pair {
    double dist;
    size_t ref_idx, hyp_idx;
  };
  std::vector<Pair> pairs;
  for (size_t r = 0; r < ref.size(); ++r) {
    for (size_t h = 0; h < hyp.size(); ++h) {
      const double d = std::abs(hyp[h] - ref[r]);
      if (d <= tol) pairs.push_back({d, r, h});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.ref_idx != b.ref_idx) return a.ref_idx < b.ref_idx;
    return a.hyp_idx < b.hyp_idx;
  });
  std::vector<bool> ref_used(ref.size(), false), hyp_used(hyp.size(), false);
  long hits = 0;
  for (const Pair& p : pairs) {
    if (ref_used[p.ref_idx] || hyp_used[p.hyp_idx]) continue;
    ref_used[p.ref_idx] = true;
    hyp_used[p.hyp_idx] = true;
    ++hits;
  }
  return hits;
}

bool nearAny(const std::vector<double>& sorted, double t, double tol) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  if (it != sorted.end() && *it - t <= tol) return true;
  if (it != sorted.begin() && t - *std::prev(it) <= tol) return true;
  return false;
}

bool anyStrictlyInside(const std::vector<double>& sorted, double lo, double hi) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), lo);
  return it != sorted.end() && *it < hi;
}

// Token edges of the hypothesis, always including the utterance edges.
std::vector<double> hypTokenEdges(const TimedBoundarySet& hyp) {
  std::vector<double> edges;
  edges.push_back(0.0);
  for (double b : hyp.boundaries) {
    if (b <= kEdgeEps) continue;
    if (std::abs(b - hyp.terminal) < kEdgeEps) continue;
    edges.push_back(b);
  }
  edges.push_back(hyp.terminal);
  return edges;
}

bool tokenHit(const std::vector<double>& hyp_edges, const RefToken& tok,
              double tol) {
  return nearAny(hyp_edges, tok.start, tol) && nearAny(hyp_edges, tok.end, tol) &&
         !anyStrictlyInside(hyp_edges, tok.start + tol, tok.end - tol);
}

MetricCounts tokenCounts(const TimedBoundarySet& hyp,
                         const ReferenceAlignment& ref, double tol) {
  MetricCounts c;
  const std::vector<double> edges = hypTokenEdges(hyp);
  c.n_hyp_tokens = static_cast<long>(edges.size()) - 1;
  c.n_ref_tokens = static_cast<long>(ref.tokens.size());
  for (const RefToken& tok : ref.tokens)
    if (tokenHit(edges, tok, tol)) ++c.n_token_hit;
  return c;
}

double pct(long num, long den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TimedBoundarySet ReferenceAlignment::boundarySet() const {
  TimedBoundarySet set;
  set.utterance_id = utterance_id;
  set.terminal = terminal();
  for (const RefToken& t : tokens) set.boundaries.push_back(t.end);
  return set;
}

double f1FromCounts(long hits, long n_hyp, long n_ref) {
  const double p = pct(hits, n_hyp), r = pct(hits, n_ref);
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double rValue(double recall_pct, double os_pct) {
  const double hr = recall_pct / 100.0, os = os_pct / 100.0;
  const double r1 = std::sqrt((1.0 - hr) * (1.0 - hr) + os * os);
  const double r2 = (-os + hr - 1.0) / std::sqrt(2.0);
  return (1.0 - (std::abs(r1) + std::abs(r2)) / 2.0) * 100.0;
}

MetricReport reportFromCounts(const MetricCounts& c) {
  MetricReport m;
  m.counts = c;
  if (c.n_ref == 0 && c.n_hyp == 0) {
    m.precision = m.recall = m.f1 = 100.0;
    m.os = 0.0;
  } else {
    m.precision = pct(c.n_hit, c.n_hyp);
    m.recall = pct(c.n_hit, c.n_ref);
    m.f1 = f1FromCounts(c.n_hit, c.n_hyp, c.n_ref);
    m.os = c.n_ref == 0 ? std::numeric_limits<double>::infinity()
                        : (static_cast<double>(c.n_hyp) / c.n_ref - 1.0) * 100.0;
  }
  m.r_value = rValue(m.recall, m.os);
  m.token_precision = pct(c.n_token_hit, c.n_hyp_tokens);
  m.token_recall = pct(c.n_token_hit, c.n_ref_tokens);
  m.token_f1 = f1FromCounts(c.n_token_hit, c.n_hyp_tokens, c.n_ref_tokens);
  return m;
}

MetricReport boundaryMetrics(const TimedBoundarySet& hyp,
                             const TimedBoundarySet& ref,
                             const BoundaryMetricOptions& opt) {
  if (hyp.utterance_id != ref.utterance_id)
    throw std::invalid_argument("mismatched utterance ids: " + hyp.utterance_id +
                                " vs " + ref.utterance_id);
  MetricCounts c;
  const std::vector<double> h = scoringBoundaries(hyp, opt.include_edges);
  const std::vector<double> r = scoringBoundaries(ref, opt.include_edges);
  c.n_hyp = static_cast<long>(h.size());
  c.n_ref = static_cast<long>(r.size());
  c.n_hit = matchCount(h, r, opt.tolerance);
  return reportFromCounts(c);
}

MetricReport tokenF1(const TimedBoundarySet& hyp, const ReferenceAlignment& ref,
                     double tolerance) {
  if (hyp.utterance_id != ref.utterance_id)
    throw std::invalid_argument("mismatched utterance ids");
  return reportFromCounts(tokenCounts(hyp, ref, tolerance));
}

PerTypeReport perTypeRecall(const std::vector<TimedBoundarySet>& hyps,
                            const std::vector<ReferenceAlignment>& refs,
                            double tolerance, long min_count) {
  if (hyps.size() != refs.size())
    throw std::invalid_argument("per-type recall needs paired utterances");
  struct Tally {
    long count = 0, hits = 0;
  };
  std::map<std::string, Tally> tallies;
  double dur_sum = 0.0, dur_sq = 0.0;
  long dur_n = 0;
  for (size_t i = 0; i < hyps.size(); ++i) {
    const std::vector<double> edges = hypTokenEdges(hyps[i]);
    for (const RefToken& tok : refs[i].tokens) {
      Tally& t = tallies[tok.label];
      ++t.count;
      if (tokenHit(edges, tok, tolerance)) {
        ++t.hits;
        const double d = tok.end - tok.start;
        dur_sum += d;
        dur_sq += d * d;
        ++dur_n;
      }
    }
  }
  PerTypeReport report;
  for (const auto& [label, t] : tallies) {
    if (t.count < min_count) continue;
    report.types.push_back({label, pct(t.hits, t.count), t.count, t.hits});
  }
  std::sort(report.types.begin(), report.types.end(),
            [](const TypeRecall& a, const TypeRecall& b) {
              if (a.recall_pct != b.recall_pct) return a.recall_pct > b.recall_pct;
              return a.label < b.label;
            });
  report.hit_durations.count = dur_n;
  if (dur_n > 0) {
    report.hit_durations.mean = dur_sum / dur_n;
    const double var = std::max(0.0, dur_sq / dur_n -
                                         report.hit_durations.mean *
                                             report.hit_durations.mean);
    report.hit_durations.stddev = std::sqrt(var);
  }
  return report;
}

void MetricAccumulator::add(const TimedBoundarySet& hyp,
                            const TimedBoundarySet& ref) {
  const MetricReport r = boundaryMetrics(hyp, ref, opt_);
  counts_.n_ref += r.counts.n_ref;
  counts_.n_hyp += r.counts.n_hyp;
  counts_.n_hit += r.counts.n_hit;
  mean_sums_.precision += r.precision;
  mean_sums_.recall += r.recall;
  mean_sums_.f1 += r.f1;
  mean_sums_.os += std::isfinite(r.os) ? r.os : 0.0;
  mean_sums_.r_value += r.r_value;
  ++n_boundary_utts_;
}

void MetricAccumulator::add(const TimedBoundarySet& hyp,
                            const ReferenceAlignment& ref) {
  add(hyp, ref.boundarySet());
  const MetricCounts c = tokenCounts(hyp, ref, opt_.tolerance);
  counts_.n_ref_tokens += c.n_ref_tokens;
  counts_.n_hyp_tokens += c.n_hyp_tokens;
  counts_.n_token_hit += c.n_token_hit;
  const MetricReport r = reportFromCounts(c);
  mean_sums_.token_precision += r.token_precision;
  mean_sums_.token_recall += r.token_recall;
  mean_sums_.token_f1 += r.token_f1;
  ++n_token_utts_;
}

MetricReport MetricAccumulator::report() const {
  MetricReport out = reportFromCounts(counts_);
  if (mode_ == AggregationMode::kUtteranceMean) {
    if (n_boundary_utts_ > 0) {
      const double n = static_cast<double>(n_boundary_utts_);
      out.precision = mean_sums_.precision / n;
      out.recall = mean_sums_.recall / n;
      out.f1 = mean_sums_.f1 / n;
      out.os = mean_sums_.os / n;
      out.r_value = mean_sums_.r_value / n;
    }
    if (n_token_utts_ > 0) {
      const double n = static_cast<double>(n_token_utts_);
      out.token_precision = mean_sums_.token_precision / n;
      out.token_recall = mean_sums_.token_recall / n;
      out.token_f1 = mean_sums_.token_f1 / n;
    }
  }
  return out;
}

std::string formatReport(const MetricReport& m) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << "Prec.   Rec.    F1      OS      R-val.  Token F1\n";
  auto col = [&](double v) {
    std::ostringstream c;
    c.setf(std::ios::fixed);
    c.precision(1);
    c << v;
    std::string s = c.str();
    while (s.size() < 8) s.push_back(' ');
    return s;
  };
  os << col(m.precision) << col(m.recall) << col(m.f1) << col(m.os)
     << col(m.r_value) << col(m.token_f1) << "\n";
  return os.str();
}

std::string formatKeyValues(const MetricReport& m) {
  std::ostringstream os;
  os.precision(10);
  os << "boundary_precision " << m.precision << "\n"
     << "boundary_recall " << m.recall << "\n"
     << "boundary_f1 " << m.f1 << "\n"
     << "os " << m.os << "\n"
     << "r_value " << m.r_value << "\n"
     << "token_precision " << m.token_precision << "\n"
     << "token_recall " << m.token_recall << "\n"
     << "token_f1 " << m.token_f1 << "\n"
     << "n_ref " << m.counts.n_ref << "\n"
     << "n_hyp " << m.counts.n_hyp << "\n"
     << "n_hit " << m.counts.n_hit << "\n"
     << "n_ref_tokens " << m.counts.n_ref_tokens << "\n"
     << "n_hyp_tokens " << m.counts.n_hyp_tokens << "\n"
     << "n_token_hit " << m.counts.n_token_hit << "\n";
  return os.str();
}

}  // namespace dpdp
