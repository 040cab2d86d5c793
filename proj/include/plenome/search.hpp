#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "plenome/cost.hpp"
#include "plenome/geometry.hpp"

namespace plenome {

struct SearchConfig {
  int window = 64;                  // half-width W
  double d = 23.30;                 // microlens diameter (pixels)
  bool integer_d = false;           // round d before use
  RingShape shape = RingShape::Rhombus;
  int top_k = 16;
  double matching_distance = 0.0;   // s, MTSS-like only
  Orientation orientation_known = Orientation::Horizontal;  // MFME / MTSS-like
  bool negative_odd_offset = false;
  int block_w = 16;
  int block_h = 16;
  bool early_termination = true;
  int raster_threshold = 5;         // TZS-simplified
  int square_radius = 2;            // MFME
  int max_recenter = 8;             // star refinement
  bool neighbors = true;            // MCPNS neighbors stage; off for ablation
  CostMetric metric = CostMetric::Sad;
  bool trace = false;

  /// Diameter after applying the integer-d mode.
  double effective_d() const;
  /// Throws InvalidArgument / InvalidDiameter on violated invariants.
  void validate() const;
};

struct TraceEntry {
  Candidate candidate;
  std::uint64_t cost = 0;
};

struct SearchResult {
  Mv best_mv;
  std::uint64_t best_cost = 0;
  std::size_t points_evaluated = 0;
  Stage stage_of_best = Stage::Center;
  int refine_passes = 0;
  std::vector<TraceEntry> trace;
};

enum class Strategy { Fs, Tzs, Mfme, Mtss, Mcpns, McpnsNoNeighbors };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

/// Candidate evaluator shared by every strategy.
///
/// Candidates outside the search window or whose displaced block leaves the
/// reference frame are skipped and not counted. The best result only moves
/// on a strict cost improvement, so ties keep the first-evaluated point.
class SearchState {
 public:
  SearchState(const Frame& cur, const Frame& ref, const BlockRect& block,
              const SearchWindow& window, CostMetric metric, bool trace);

  /// Evaluated cost, or nullopt if the candidate is infeasible.
  std::optional<std::uint64_t> evaluate(const Candidate& candidate);

  bool feasible(Mv mv) const;
  bool has_best() const { return has_best_; }
  Mv best_mv() const { return result_.best_mv; }
  std::uint64_t best_cost() const { return result_.best_cost; }
  const SearchWindow& window() const { return window_; }

  /// Throws EmptyFeasibleSet when nothing was evaluated.
  SearchResult finish();

  SearchResult& result() { return result_; }

 private:
  const Frame& cur_;
  const Frame& ref_;
  BlockRect block_;
  SearchWindow window_;
  CostMetric metric_;
  bool trace_;
  bool has_best_ = false;
  SearchResult result_;
};

/// Optional square region (around `center`) that refinement may not leave.
struct RegionLimit {
  Mv center;
  int radius = 0;
};

/// Star refinement: expanding diamonds 1, 2, 4, ..., 2^(N-1) with
/// N = floor(log2 reach) centered at the current best, re-centering after
/// each improving pass, up to `max_recenter` times.
void refine_star(SearchState& state, double reach, int max_recenter,
                 std::optional<RegionLimit> limit = std::nullopt);

SearchResult full_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                         const SearchConfig& cfg);
SearchResult tzs_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                        const SearchConfig& cfg);
SearchResult mfme_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                         const SearchConfig& cfg);
SearchResult mtss_like_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                              const SearchConfig& cfg);
SearchResult mcpns_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                          const SearchConfig& cfg);

SearchResult run_strategy(Strategy strategy, const Frame& cur, const Frame& ref,
                          const BlockRect& block, Mv pmv, const SearchConfig& cfg);

/// Tiles the frame into blocks of the configured size, edge blocks
/// truncated, in raster order.
std::vector<BlockRect> tile_blocks(int width, int height, int bw, int bh);

struct BlockOutcome {
  std::size_t block_id = 0;
  BlockRect block;
  SearchResult result;
  double micros = 0.0;  // wall time of this block's search
};

/// Runs one strategy over the given blocks on `threads` workers. Results are
/// indexed by block position, independent of completion order.
std::vector<BlockOutcome> search_blocks(Strategy strategy, const Frame& cur, const Frame& ref,
                                        const std::vector<BlockRect>& blocks, Mv pmv,
                                        const SearchConfig& cfg, int threads);

}  // namespace plenome
