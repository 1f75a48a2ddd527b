#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "dzo/graph.hpp"
#include "dzo/metrics.hpp"
#include "dzo/trace.hpp"

namespace dzo {

inline constexpr const char* kTraceCsvHeader =
    "k,f_gap,grad_norm_sq,consensus_err,eta,beta,delta,oracle_calls";

// %.17g, with nan/inf spelled out.
std::string FormatCsvNumber(double v);

std::string TraceCsv(const Trace& trace);
std::string AggregateCsv(const AggregateCurve& curve);
// Two whitespace-separated columns: k and value.
std::string PlotDat(const std::vector<long long>& k, const std::vector<double>& values);

struct PlotSeries {
  std::string label;
  std::vector<long long> k;
  std::vector<double> values;
};

// Self-contained log-log line chart. Nonpositive points are dropped.
std::string SvgLogLogChart(const std::string& title, const std::vector<PlotSeries>& series);

// {n, rho, rho2, c1, d1}; c1 and d1 are null when the graph has one agent.
nlohmann::json SpectralReport(const Graph& g);

nlohmann::json TraceMetaJson(const TraceMeta& meta);

// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::string& path, const std::string& content);

}  // namespace dzo
