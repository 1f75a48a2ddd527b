#include "dzo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dzo {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

nlohmann::json NumberOrNull(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string FormatCsvNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string TraceCsv(const Trace& trace) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.k) + "," + FormatCsvNumber(r.f_gap) + "," +
           FormatCsvNumber(r.grad_norm_sq) + "," + FormatCsvNumber(r.consensus_err) + "," +
           FormatCsvNumber(r.eta) + "," + FormatCsvNumber(r.beta) + "," +
           FormatCsvNumber(r.delta) + "," + std::to_string(r.oracle_calls) + "\n";
  }
  return out;
}

std::string AggregateCsv(const AggregateCurve& curve) {
  std::string out =
      "k,f_gap_mean,f_gap_ci,grad_norm_sq_mean,grad_norm_sq_ci,consensus_err_mean,"
      "consensus_err_ci,seeds\n";
  for (std::size_t j = 0; j < curve.k.size(); ++j) {
    out += std::to_string(curve.k[j]);
    for (const auto* m : {&curve.f_gap, &curve.grad_norm_sq, &curve.consensus_err})
      out += "," + FormatCsvNumber((*m)[j].mean) + "," + FormatCsvNumber((*m)[j].half_width);
    out += "," + std::to_string(curve.seeds) + "\n";
  }
  return out;
}

std::string PlotDat(const std::vector<long long>& k, const std::vector<double>& values) {
  std::string out;
  for (std::size_t j = 0; j < k.size() && j < values.size(); ++j)
    out += std::to_string(k[j]) + " " + FormatCsvNumber(values[j]) + "\n";
  return out;
}

std::string SvgLogLogChart(const std::string& title, const std::vector<PlotSeries>& series) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 150, kT = 40, kB = 50;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t j = 0; j < s.k.size() && j < s.values.size(); ++j) {
      if (s.k[j] <= 0 || !(s.values[j] > 0) || !std::isfinite(s.values[j])) continue;
      const double lx = std::log10(static_cast<double>(s.k[j]));
      const double ly = std::log10(s.values[j]);
      x_lo = std::min(x_lo, lx);
      x_hi = std::max(x_hi, lx);
      y_lo = std::min(y_lo, ly);
      y_hi = std::max(y_hi, ly);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (x_hi - x_lo < 1e-9) x_hi = x_lo + 1;
  if (y_hi - y_lo < 1e-9) y_lo -= 0.5, y_hi += 0.5;
  x_lo = std::floor(x_lo);
  x_hi = std::ceil(x_hi);
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  const auto px = [&](double lx) { return kL + (lx - x_lo) / (x_hi - x_lo) * (kW - kL - kR); };
  const auto py = [&](double ly) { return kT + (y_hi - ly) / (y_hi - y_lo) * (kH - kT - kB); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
     << "</text>\n";
  for (double d = x_lo; d <= x_hi + 1e-9; d += 1) {
    os << "<line x1=\"" << px(d) << "\" y1=\"" << kT << "\" x2=\"" << px(d) << "\" y2=\""
       << kH - kB << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px(d) << "\" y=\"" << kH - kB + 15
       << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  const double y_step = std::max(1.0, std::ceil((y_hi - y_lo) / 10));
  for (double d = y_lo; d <= y_hi + 1e-9; d += y_step) {
    os << "<line x1=\"" << kL << "\" y1=\"" << py(d) << "\" x2=\"" << kW - kR << "\" y2=\""
       << py(d) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kL - 5 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR
     << "\" height=\"" << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 10
     << "\" text-anchor=\"middle\">iteration k</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < series[s].k.size() && j < series[s].values.size(); ++j) {
      const double v = series[s].values[j];
      if (series[s].k[j] <= 0 || !(v > 0) || !std::isfinite(v)) continue;
      os << px(std::log10(static_cast<double>(series[s].k[j]))) << "," << py(std::log10(v))
         << " ";
    }
    os << "\"/>\n";
    const double ly = kT + 15 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR + 30
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kW - kR + 35 << "\" y=\"" << ly + 4 << "\">" << series[s].label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

nlohmann::json SpectralReport(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n();
  j["rho"] = g.rho();
  j["rho2"] = g.rho2();
  if (g.n() > 1) {
    j["c1"] = AdvisorC1(g);
    j["d1"] = AdvisorD1(g);
  } else {
    j["c1"] = nullptr;
    j["d1"] = nullptr;
  }
  return j;
}

nlohmann::json TraceMetaJson(const TraceMeta& meta) {
  nlohmann::json j;
  j["regime"] = meta.regime;
  j["seed"] = meta.seed;
  j["n"] = meta.n;
  j["p"] = meta.p;
  j["graph"] = meta.graph;
  j["T"] = meta.T;
  j["record_every"] = meta.record_every;
  j["avg_grad_norm_sq"] = NumberOrNull(meta.avg_grad_norm_sq);
  j["avg_f_gap"] = NumberOrNull(meta.avg_f_gap);
  j["wall_time"] = meta.wall_time;
  j["diverged"] = meta.diverged;
  if (meta.diverged) j["failure"] = meta.failure;
  return j;
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dzo
