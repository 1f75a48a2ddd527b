#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace dzo {

struct TraceRecord {
  long long k = 0;
  // NaN when the problem has no known f*.
  double f_gap = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_sq = 0.0;
  double consensus_err = 0.0;
  double eta = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  long long oracle_calls = 0;
};

struct TraceMeta {
  std::string regime;
  std::uint64_t seed = 0;
  int n = 0;
  int p = 0;
  std::string graph;
  long long T = 0;
  long long record_every = 1;
  // (1/K) sum_{k<K} over every iteration actually run, K = iterations done.
  double avg_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double avg_f_gap = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
  bool diverged = false;
  std::string failure;
};

struct Trace {
  std::vector<TraceRecord> records;
  TraceMeta meta;
};

}  // namespace dzo
