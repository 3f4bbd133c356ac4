#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dpdp {

// Hypothesized boundary times for one utterance, in seconds or frame
// indices.  Strictly increasing, all within (0, terminal]; the utterance-
// initial boundary at time 0 is excluded by convention.
struct TimedBoundarySet {
  std::vector<double> boundaries;
  double terminal = 0.0;
  std::string utterance_id;
};

struct RefToken {
  double start = 0.0;
  double end = 0.0;
  std::string label;
};

// Ground-truth tokens for one utterance, ordered and non-overlapping.
struct ReferenceAlignment {
  std::vector<RefToken> tokens;
  std::string utterance_id;

  double terminal() const { return tokens.empty() ? 0.0 : tokens.back().end; }
  TimedBoundarySet boundarySet() const;
};

struct MetricCounts {
  long n_ref = 0;
  long n_hyp = 0;
  long n_hit = 0;
  long n_ref_tokens = 0;
  long n_hyp_tokens = 0;
  long n_token_hit = 0;
};

// All percentages.  f1 is the harmonic mean of precision and recall;
// os = (n_hyp / n_ref - 1) * 100.
struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double os = 0.0;
  double r_value = 0.0;
  double token_precision = 0.0;
  double token_recall = 0.0;
  double token_f1 = 0.0;
  MetricCounts counts;
};

struct BoundaryMetricOptions {
  double tolerance = 0.02;
  // When true, the utterance-initial (t = 0) and utterance-final boundaries
  // take part in the matching instead of being stripped.
  bool include_edges = false;
};

// Greedy one-to-one matching by increasing distance; each reference boundary
// matches at most one hypothesis boundary within +-tolerance.
MetricReport boundaryMetrics(const TimedBoundarySet& hyp,
                             const TimedBoundarySet& ref,
                             const BoundaryMetricOptions& opt);

// R-value of Rasanen et al.: with HR = recall/100 and OS = os/100,
//   r1 = sqrt((1 - HR)^2 + OS^2),  r2 = (-OS + HR - 1) / sqrt(2),
//   R  = (1 - (|r1| + |r2|) / 2) * 100.
double rValue(double recall_pct, double os_pct);

double f1FromCounts(long hits, long n_hyp, long n_ref);

// A reference token is hit iff both its boundaries are matched within the
// tolerance and no hypothesis boundary lies strictly between them (outside
// the tolerance of either edge).  Utterance edges count as matched.
MetricReport tokenF1(const TimedBoundarySet& hyp, const ReferenceAlignment& ref,
                     double tolerance);

struct TypeRecall {
  std::string label;
  double recall_pct = 0.0;
  long count = 0;
  long hits = 0;
};

struct DurationStats {
  double mean = 0.0;
  double stddev = 0.0;
  long count = 0;
};

struct PerTypeReport {
  std::vector<TypeRecall> types;  // sorted by recall descending
  DurationStats hit_durations;    // over correctly segmented tokens
};

PerTypeReport perTypeRecall(const std::vector<TimedBoundarySet>& hyps,
                            const std::vector<ReferenceAlignment>& refs,
                            double tolerance, long min_count = 1);

// Corpus-level scoring.  kCounts aggregates counts across utterances and
// computes ratios once at the end (the default); kUtteranceMean averages the
// per-utterance percentage scores instead.
enum class AggregationMode { kCounts, kUtteranceMean };

class MetricAccumulator {
 public:
  explicit MetricAccumulator(BoundaryMetricOptions opt,
                             AggregationMode mode = AggregationMode::kCounts)
      : opt_(opt), mode_(mode) {}

  void add(const TimedBoundarySet& hyp, const TimedBoundarySet& ref);
  void add(const TimedBoundarySet& hyp, const ReferenceAlignment& ref);
  MetricReport report() const;

 private:
  BoundaryMetricOptions opt_;
  AggregationMode mode_;
  MetricCounts counts_;
  MetricReport mean_sums_;  // running sums of per-utterance reports
  long n_boundary_utts_ = 0;
  long n_token_utts_ = 0;
};

MetricReport reportFromCounts(const MetricCounts& counts);

// Aligned plain-text table plus machine-readable key-value lines.
std::string formatReport(const MetricReport& report);
std::string formatKeyValues(const MetricReport& report);

}  // namespace dpdp
