#include "plenome/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plenome/error.hpp"

namespace plenome {

namespace {

const StrategyOutcome& outcome(const EvalRecord& record, const std::string& strategy) {
  const auto it = record.outcomes.find(strategy);
  if (it == record.outcomes.end()) {
    throw Error(ErrorCategory::InvalidArgument,
                "block " + std::to_string(record.block_id) + " has no result for " + strategy);
  }
  return it->second;
}

template <typename F>
double mean_over(std::span<const EvalRecord> records, F&& value) {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : records) total += value(r);
  return total / static_cast<double>(records.size());
}

double geomean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCategory::InvalidArgument, "geometric mean of nothing");
  double log_sum = 0.0;
  // Sub-microsecond timings are clamped so the log stays finite.
  for (double v : values) log_sum += std::log(std::max(v, 1e-3));
  return std::exp(log_sum / static_cast<double>(values.size()));
}

}  // namespace

double asp(std::span<const EvalRecord> records, const std::string& strategy) {
  return mean_over(records, [&](const EvalRecord& r) {
    return static_cast<double>(outcome(r, strategy).points);
  });
}

double ape(std::span<const EvalRecord> records, const std::string& strategy) {
  return mean_over(records, [&](const EvalRecord& r) {
    return static_cast<double>(manhattan(outcome(r, strategy).mv, r.oracle_mv));
  });
}

double hit_rate(std::span<const EvalRecord> records, const std::string& strategy) {
  return mean_over(records, [&](const EvalRecord& r) {
    return outcome(r, strategy).cost == r.oracle_cost ? 1.0 : 0.0;
  });
}

double cost_excess_mean(std::span<const EvalRecord> records, const std::string& strategy) {
  return mean_over(records, [&](const EvalRecord& r) {
    const auto cost = outcome(r, strategy).cost;
    if (cost < r.oracle_cost) {
      throw Error(ErrorCategory::InvalidArgument, "strategy cost below the oracle cost");
    }
    return static_cast<double>(cost - r.oracle_cost);
  });
}

double wall_ratio(std::span<const double> times, std::span<const double> anchor_times) {
  return 100.0 * geomean(times) / geomean(anchor_times);
}

double wall_ratio(std::span<const EvalRecord> records, const std::string& strategy,
                  const std::string& anchor) {
  std::vector<double> times, anchor_times;
  for (const auto& r : records) {
    times.push_back(outcome(r, strategy).micros);
    anchor_times.push_back(outcome(r, anchor).micros);
  }
  return wall_ratio(times, anchor_times);
}

int lattice_distance(Mv mv, const MlaGeometry& geom, DistanceNorm norm) {
  int best = std::numeric_limits<int>::max();
  for (const Mv point : geom.lattice_points_near(mv)) {
    const int dist = norm == DistanceNorm::Chebyshev ? chebyshev(mv, point) : manhattan(mv, point);
    best = std::min(best, dist);
  }
  return best;
}

double hit_rate_at_mcp(std::span<const Mv> oracle_mvs, const MlaGeometry& geom, int tolerance,
                       DistanceNorm norm) {
  if (oracle_mvs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const Mv mv : oracle_mvs) {
    if (lattice_distance(mv, geom, norm) <= tolerance) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(oracle_mvs.size());
}

DeviationBuckets deviation_buckets(std::span<const Mv> oracle_mvs, const MlaGeometry& geom,
                                   DistanceNorm norm) {
  DeviationBuckets buckets{};
  if (oracle_mvs.empty()) return buckets;
  for (const Mv mv : oracle_mvs) {
    const int dist = lattice_distance(mv, geom, norm);
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      if (dist <= kBucketLimits[b]) buckets[b] += 1.0;
    }
  }
  for (double& b : buckets) b /= static_cast<double>(oracle_mvs.size());
  return buckets;
}

EvalReport build_report(std::vector<EvalRecord> records, const std::vector<std::string>& strategies,
                        const MlaGeometry& geom) {
  std::sort(records.begin(), records.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.block_id < b.block_id; });
  EvalReport report;
  report.block_count = records.size();

  const auto has = [&](const std::string& name) {
    return std::find(strategies.begin(), strategies.end(), name) != strategies.end();
  };
  for (const auto& name : strategies) {
    StrategySummary s;
    s.name = name;
    s.blocks = records.size();
    s.asp = asp(records, name);
    s.ape = ape(records, name);
    s.hit_rate = hit_rate(records, name);
    s.cost_excess_mean = cost_excess_mean(records, name);
    s.mean_micros = mean_over(records, [&](const EvalRecord& r) { return outcome(r, name).micros; });
    if (!records.empty() && has("fs")) s.wall_ratio_fs = wall_ratio(records, name, "fs");
    if (!records.empty() && has("tzs")) s.wall_ratio_tzs = wall_ratio(records, name, "tzs");
    report.strategies.push_back(std::move(s));
  }

  std::vector<Mv> oracle;
  oracle.reserve(records.size());
  for (const auto& r : records) oracle.push_back(r.oracle_mv);
  report.mcp_exact_rate = hit_rate_at_mcp(oracle, geom, 0);
  report.mcp_within1_rate = hit_rate_at_mcp(oracle, geom, 1);
  report.buckets = deviation_buckets(oracle, geom);
  return report;
}

}  // namespace plenome
