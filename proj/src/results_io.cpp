#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "lis/bench.hpp"
#include "lis/error.hpp"

namespace lis {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_result_row(const BenchRecord& r, std::ostream& out) {
  out << r.index_name << ',' << format_number(r.alpha) << ',' << to_string(r.dataset) << ','
      << format_number(r.mean_lookup_ns) << ',' << format_number(r.p50_lookup_ns) << ','
      << format_number(r.p99_lookup_ns) << ',' << format_number(r.mean_probes) << ','
      << format_number(r.build_ms) << '\n';
}

void write_results_csv(std::span<const BenchRecord> records, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : records) write_result_row(r, out);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  // strtod needs a terminated buffer; fields are short.
  const std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("results line " + std::to_string(line_no) + ": bad number '" + s + "'",
                     line_no);
  }
  return v;
}

}  // namespace

std::vector<BenchRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) {
    throw FormatError("unexpected results header '" + line + "'");
  }
  std::vector<BenchRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) {
      throw ParseError("results line " + std::to_string(line_no) + ": expected 8 fields", line_no);
    }
    BenchRecord r;
    r.index_name = std::string(f[0]);
    r.alpha = parse_double(f[1], line_no);
    r.dataset = parse_dataset_tag(f[2]);
    r.mean_lookup_ns = parse_double(f[3], line_no);
    r.p50_lookup_ns = parse_double(f[4], line_no);
    r.p99_lookup_ns = parse_double(f[5], line_no);
    r.mean_probes = parse_double(f[6], line_no);
    r.build_ms = parse_double(f[7], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

void write_ratios_csv(std::span<const DeteriorationRow> rows, std::ostream& out) {
  out << kRatiosHeader << '\n';
  for (const auto& r : rows) {
    out << r.index_name << ',' << format_number(r.alpha) << ',' << format_number(r.ratio_time)
        << ',' << format_number(r.ratio_probes) << '\n';
  }
}

Report build_report(std::span<const BenchRecord> records) {
  struct Cell {
    const BenchRecord* clean = nullptr;
    const BenchRecord* poisoned = nullptr;
  };
  std::map<std::string, std::map<double, Cell>> cells;
  for (const auto& r : records) {
    auto& cell = cells[r.index_name][r.alpha];
    (r.dataset == DatasetTag::clean ? cell.clean : cell.poisoned) = &r;
  }

  Report report;
  for (const auto& [name, by_alpha] : cells) {
    IndexSummary s;
    s.index_name = name;
    std::size_t nc = 0, np = 0;
    for (const auto& [alpha, cell] : by_alpha) {
      if (cell.clean) {
        s.clean_mean_lookup_ns += cell.clean->mean_lookup_ns;
        s.clean_mean_probes += cell.clean->mean_probes;
        ++nc;
      }
      if (cell.poisoned) {
        s.poisoned_mean_lookup_ns += cell.poisoned->mean_lookup_ns;
        s.poisoned_mean_probes += cell.poisoned->mean_probes;
        ++np;
      }
    }
    if (nc) {
      s.clean_mean_lookup_ns /= static_cast<double>(nc);
      s.clean_mean_probes /= static_cast<double>(nc);
    }
    if (np) {
      s.poisoned_mean_lookup_ns /= static_cast<double>(np);
      s.poisoned_mean_probes /= static_cast<double>(np);
    }
    report.summary.push_back(std::move(s));
  }
  std::stable_sort(report.summary.begin(), report.summary.end(),
                   [](const IndexSummary& a, const IndexSummary& b) {
                     if (a.clean_mean_lookup_ns != b.clean_mean_lookup_ns) {
                       return a.clean_mean_lookup_ns < b.clean_mean_lookup_ns;
                     }
                     return a.index_name < b.index_name;
                   });

  for (const auto& s : report.summary) {
    for (const auto& [alpha, cell] : cells.at(s.index_name)) {
      if (!cell.clean || !cell.poisoned) {
        throw FormatError("results for '" + s.index_name + "' at alpha " + format_number(alpha) +
                          " lack a clean/poisoned pair");
      }
      report.rows.push_back(deterioration(*cell.clean, *cell.poisoned));
    }
  }
  return report;
}

void print_report(const Report& report, std::ostream& out) {
  write_ratios_csv(report.rows, out);
  out << '\n'
      << "index,clean_mean_lookup_ns,poisoned_mean_lookup_ns,clean_mean_probes,"
         "poisoned_mean_probes\n";
  for (const auto& s : report.summary) {
    out << s.index_name << ',' << format_number(s.clean_mean_lookup_ns) << ','
        << format_number(s.poisoned_mean_lookup_ns) << ',' << format_number(s.clean_mean_probes)
        << ',' << format_number(s.poisoned_mean_probes) << '\n';
  }
}

}  // namespace lis
