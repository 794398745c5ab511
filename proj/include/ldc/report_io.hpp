#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "ldc/experiments.hpp"
#include "ldc/projection.hpp"

namespace ldc {

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for the rest.
/// Locale independent, so output bytes depend only on the value.
inline std::string to_csv_number(double x) { return detail::format_number(x); }

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& records) {
  os << "replicate,n,statistic,value,lower,upper\n";
  for (const auto& r : records)
    os << r.replicate << ',' << r.n << ',' << r.statistic << ',' << to_csv_number(r.value) << ','
       << to_csv_number(r.lower) << ',' << to_csv_number(r.upper) << '\n';
}

inline void write_summary_csv(std::ostream& os, const SummaryReport& rep) {
  os << "n,statistic,count,mean,sd,min,max,target\n";
  for (const auto& r : rep.rows)
    os << r.n << ',' << r.statistic << ',' << r.count << ',' << to_csv_number(r.mean) << ',' << to_csv_number(r.sd)
       << ',' << to_csv_number(r.min) << ',' << to_csv_number(r.max) << ',' << to_csv_number(r.target) << '\n';
}

inline void write_histogram_csv(std::ostream& os, const SummaryReport& rep) {
  os << "n,statistic,bin_lo,bin_hi,count\n";
  for (const auto& h : rep.histograms) {
    const double w = 1.0 / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      os << h.n << ',' << h.statistic << ',' << to_csv_number(b * w) << ',' << to_csv_number((b + 1) * w) << ','
         << h.counts[b] << '\n';
  }
}

inline void write_projection_csv(std::ostream& os, const ProjectionReport& rep) {
  os << "model,l_value,gap,is_projection\n";
  for (std::size_t i = 0; i < rep.gaps.size(); ++i)
    os << i << ',' << to_csv_number(rep.l_values[i]) << ',' << to_csv_number(rep.gaps[i]) << ','
       << (rep.is_projection(i) ? 1 : 0) << '\n';
}

}  // namespace ldc
