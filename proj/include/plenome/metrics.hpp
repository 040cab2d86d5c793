#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plenome/geometry.hpp"

namespace plenome {

struct StrategyOutcome {
  Mv mv;
  std::uint64_t cost = 0;
  std::size_t points = 0;
  double micros = 0.0;
  Stage stage = Stage::Center;
};

/// Per-block results of every strategy plus the full-search oracle.
struct EvalRecord {
  std::size_t block_id = 0;
  Mv oracle_mv;
  std::uint64_t oracle_cost = 0;
  std::map<std::string, StrategyOutcome> outcomes;
};

enum class DistanceNorm { Chebyshev, L1 };

/// Cumulative fractions for distance <= 1, 2, 4, 8.
using DeviationBuckets = std::array<double, 4>;
inline constexpr std::array<int, 4> kBucketLimits = {1, 2, 4, 8};

double asp(std::span<const EvalRecord> records, const std::string& strategy);
double ape(std::span<const EvalRecord> records, const std::string& strategy);
/// Fraction of blocks whose cost equals the oracle cost.
double hit_rate(std::span<const EvalRecord> records, const std::string& strategy);
double cost_excess_mean(std::span<const EvalRecord> records, const std::string& strategy);
/// 100 * geomean(strategy wall times) / geomean(anchor wall times).
double wall_ratio(std::span<const EvalRecord> records, const std::string& strategy,
                  const std::string& anchor);
double wall_ratio(std::span<const double> times, std::span<const double> anchor_times);

/// Distance from mv to the nearest rounded MCP lattice point.
int lattice_distance(Mv mv, const MlaGeometry& geom, DistanceNorm norm = DistanceNorm::Chebyshev);

/// Fraction of MVs within `tolerance` of a lattice point (0 = exact hit).
double hit_rate_at_mcp(std::span<const Mv> oracle_mvs, const MlaGeometry& geom,
                       int tolerance = 0, DistanceNorm norm = DistanceNorm::Chebyshev);
DeviationBuckets deviation_buckets(std::span<const Mv> oracle_mvs, const MlaGeometry& geom,
                                   DistanceNorm norm = DistanceNorm::Chebyshev);

struct StrategySummary {
  std::string name;
  std::size_t blocks = 0;
  double asp = 0.0;
  double ape = 0.0;
  double hit_rate = 0.0;
  double cost_excess_mean = 0.0;
  double mean_micros = 0.0;
  std::optional<double> wall_ratio_fs;
  std::optional<double> wall_ratio_tzs;
};

struct EvalReport {
  std::size_t block_count = 0;
  std::vector<StrategySummary> strategies;
  double mcp_exact_rate = 0.0;
  double mcp_within1_rate = 0.0;
  DeviationBuckets buckets{};
};

/// Aggregates records (sorted by block id first, so input order does not
/// matter). `geom` drives the oracle-MV distribution statistics.
EvalReport build_report(std::vector<EvalRecord> records, const std::vector<std::string>& strategies,
                        const MlaGeometry& geom);

}  // namespace plenome
