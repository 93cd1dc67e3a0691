#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace p2ps {

// Counters for the queries issued within one metrics interval. Walker-level
// events (duplicates, enhancements, free-rider receipts) are charged to the
// interval their query was issued in.
struct MetricsRecord {
  std::uint64_t queries_issued = 0;
  std::uint64_t hits = 0;                  // queries with at least one hit
  double success_rate = 0.0;
  std::uint64_t sum_hops_on_hits = 0;      // first-hit hop counts
  double avg_hops = 0.0;
  double hits_per_query = 0.0;             // every hit report, not only the first
  std::uint64_t duplicates_generated = 0;
  std::uint64_t duplicates_forwarded = 0;
  std::uint64_t duplicates_dropped = 0;
  double coverage_fraction = 0.0;
  std::uint64_t ttl_enhancements_used = 0;
  std::uint64_t hits_via_enhancement = 0;
  std::uint64_t hits_by_ordinary = 0;
  std::uint64_t hits_by_power = 0;
  std::uint64_t hits_via_query_table = 0;
  std::uint64_t hits_via_parallel_routing = 0;
  std::uint64_t free_rider_msgs_received = 0;

  std::uint64_t hit_reports = 0;  // numerator of hits_per_query; not emitted

  // Recomputes success_rate, avg_hops and hits_per_query from the counters.
  void finish();
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

using MetricsSeries = std::vector<MetricsRecord>;

// Header names in emission order; the first column is the interval index.
const std::vector<std::string>& metrics_columns();

// Sums the counters of `records` and recomputes the ratios. Coverage is the
// mean of the records' coverage (callers that track reach sets do better).
MetricsRecord aggregate(std::span<const MetricsRecord> records);

// Contiguous index range [begin, end) of quartile q (0..3) over n intervals.
std::pair<std::size_t, std::size_t> quartile_range(std::size_t n, int q);
MetricsRecord quartile(const MetricsSeries& s, int q);

// Reals are written with 6 decimals.
std::string format_real(double v);
std::string csv_quote(const std::string& field);
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

void write_metrics_csv(const MetricsSeries& series, std::ostream& out);
void emit_csv(const MetricsSeries& series, const std::string& path);
MetricsSeries read_metrics_csv(std::istream& in);

}  // namespace p2ps
