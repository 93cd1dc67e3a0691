#include "p2ps/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <variant>

namespace p2ps {

void MetricsRecord::finish() {
  const auto q = static_cast<double>(queries_issued);
  success_rate = queries_issued == 0 ? 0.0 : static_cast<double>(hits) / q;
  avg_hops = hits == 0 ? 0.0 : static_cast<double>(sum_hops_on_hits) / static_cast<double>(hits);
  hits_per_query = queries_issued == 0 ? 0.0 : static_cast<double>(hit_reports) / q;
}

namespace {

using Member = std::variant<std::uint64_t MetricsRecord::*, double MetricsRecord::*>;

struct Column {
  const char* name;
  Member member;
};

const std::vector<Column>& columns() {
  using R = MetricsRecord;
  static const std::vector<Column> cols{
      {"queries_issued", &R::queries_issued},
      {"hits", &R::hits},
      {"success_rate", &R::success_rate},
      {"sum_hops_on_hits", &R::sum_hops_on_hits},
      {"avg_hops", &R::avg_hops},
      {"hits_per_query", &R::hits_per_query},
      {"duplicates_generated", &R::duplicates_generated},
      {"duplicates_forwarded", &R::duplicates_forwarded},
      {"duplicates_dropped", &R::duplicates_dropped},
      {"coverage_fraction", &R::coverage_fraction},
      {"ttl_enhancements_used", &R::ttl_enhancements_used},
      {"hits_via_enhancement", &R::hits_via_enhancement},
      {"hits_by_ordinary", &R::hits_by_ordinary},
      {"hits_by_power", &R::hits_by_power},
      {"hits_via_query_table", &R::hits_via_query_table},
      {"hits_via_parallel_routing", &R::hits_via_parallel_routing},
      {"free_rider_msgs_received", &R::free_rider_msgs_received},
  };
  return cols;
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"interval"};
    for (const auto& c : columns()) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

MetricsRecord aggregate(std::span<const MetricsRecord> records) {
  MetricsRecord out;
  double coverage = 0.0;
  for (const auto& r : records) {
    for (const auto& c : columns())
      if (auto m = std::get_if<std::uint64_t MetricsRecord::*>(&c.member)) out.**m += r.**m;
    out.hit_reports += r.hit_reports;
    coverage += r.coverage_fraction;
  }
  out.coverage_fraction = records.empty() ? 0.0 : coverage / static_cast<double>(records.size());
  out.finish();
  return out;
}

std::pair<std::size_t, std::size_t> quartile_range(std::size_t n, int q) {
  if (q < 0 || q > 3) throw std::out_of_range("quartile index must be 0..3");
  return {n * static_cast<std::size_t>(q) / 4, n * static_cast<std::size_t>(q + 1) / 4};
}

MetricsRecord quartile(const MetricsSeries& s, int q) {
  auto [b, e] = quartile_range(s.size(), q);
  return aggregate(std::span<const MetricsRecord>(s).subspan(b, e - b));
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_metrics_csv(const MetricsSeries& series, std::ostream& out) {
  const auto& names = metrics_columns();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << csv_quote(names[i]);
  out << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << i;
    for (const auto& c : columns()) {
      out << ',';
      if (auto m = std::get_if<std::uint64_t MetricsRecord::*>(&c.member))
        out << series[i].**m;
      else
        out << format_real(series[i].*std::get<double MetricsRecord::*>(c.member));
    }
    out << '\n';
  }
}

void emit_csv(const MetricsSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_metrics_csv(series, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricsSeries read_metrics_csv(std::istream& in) {
  auto rows = parse_csv(in);
  if (rows.empty() || rows.front() != metrics_columns()) throw std::runtime_error("csv: unexpected metrics header");
  MetricsSeries out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != metrics_columns().size()) throw std::runtime_error("csv: wrong field count");
    MetricsRecord r;
    for (std::size_t j = 0; j < columns().size(); ++j) {
      const auto& text = row[j + 1];
      if (auto m = std::get_if<std::uint64_t MetricsRecord::*>(&columns()[j].member))
        r.**m = std::stoull(text);
      else
        r.*std::get<double MetricsRecord::*>(columns()[j].member) = std::stod(text);
    }
    r.hit_reports = static_cast<std::uint64_t>(r.hits_per_query * static_cast<double>(r.queries_issued) + 0.5);
    out.push_back(r);
  }
  return out;
}

}  // namespace p2ps
