#include "plenome/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "plenome/error.hpp"

namespace plenome {

double SearchConfig::effective_d() const { return integer_d ? std::round(d) : d; }

void SearchConfig::validate() const {
  if (window < 1) throw Error(ErrorCategory::InvalidArgument, "window must be >= 1");
  if (top_k < 1) throw Error(ErrorCategory::InvalidArgument, "K must be >= 1");
  if (block_w < 1 || block_h < 1) {
    throw Error(ErrorCategory::InvalidArgument, "block size must be positive");
  }
  if (raster_threshold < 1) {
    throw Error(ErrorCategory::InvalidArgument, "raster_threshold must be >= 1");
  }
  if (square_radius < 0 || max_recenter < 0) {
    throw Error(ErrorCategory::InvalidArgument, "square_radius and max_recenter must be >= 0");
  }
  if (matching_distance < 0.0) {
    throw Error(ErrorCategory::InvalidArgument, "matching distance must be >= 0");
  }
  diamond_loop_count(effective_d());
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Fs: return "fs";
    case Strategy::Tzs: return "tzs";
    case Strategy::Mfme: return "mfme";
    case Strategy::Mtss: return "mtss";
    case Strategy::Mcpns: return "mcpns";
    case Strategy::McpnsNoNeighbors: return "mcpns_nonb";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::Fs, Strategy::Tzs, Strategy::Mfme, Strategy::Mtss, Strategy::Mcpns,
                     Strategy::McpnsNoNeighbors}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// SearchState
// ---------------------------------------------------------------------------

SearchState::SearchState(const Frame& cur, const Frame& ref, const BlockRect& block,
                         const SearchWindow& window, CostMetric metric, bool trace)
    : cur_(cur), ref_(ref), block_(block), window_(window), metric_(metric), trace_(trace) {
  if (cur.width() != ref.width() || cur.height() != ref.height()) {
    throw Error(ErrorCategory::SizeMismatch, "current and reference frames differ in size");
  }
  if (!block.inside(cur.width(), cur.height())) {
    throw Error(ErrorCategory::InvalidArgument, "block lies outside the frame");
  }
}

bool SearchState::feasible(Mv mv) const {
  return window_.contains(mv) && displaced_inside(ref_, block_, mv);
}

std::optional<std::uint64_t> SearchState::evaluate(const Candidate& candidate) {
  if (!feasible(candidate.mv)) return std::nullopt;
  const std::uint64_t cost = block_cost(metric_, cur_, ref_, block_, candidate.mv);
  ++result_.points_evaluated;
  if (trace_) result_.trace.push_back({candidate, cost});
  if (!has_best_ || cost < result_.best_cost) {
    has_best_ = true;
    result_.best_cost = cost;
    result_.best_mv = candidate.mv;
    result_.stage_of_best = candidate.stage;
  }
  return cost;
}

SearchResult SearchState::finish() {
  if (!has_best_) {
    throw Error(ErrorCategory::EmptyFeasibleSet, "no candidate keeps the block inside the frame");
  }
  return std::move(result_);
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

void refine_star(SearchState& state, double reach, int max_recenter,
                 std::optional<RegionLimit> limit) {
  if (!state.has_best()) return;
  const int loops = diamond_loop_count(reach);
  int passes = 0;
  int recenters = 0;
  for (;;) {
    const Mv center = state.best_mv();
    const std::uint64_t before = state.best_cost();
    for (int j = 0; j < loops; ++j) {
      for (const Candidate& c : diamond_ring(center, 1 << j, j == 0, Stage::Refinement)) {
        if (limit && chebyshev(c.mv, limit->center) > limit->radius) continue;
        state.evaluate(c);
      }
    }
    ++passes;
    if (state.best_cost() >= before || recenters == max_recenter) break;
    ++recenters;
  }
  state.result().refine_passes += passes;
}

namespace {

SearchState make_state(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                       const SearchConfig& cfg) {
  cfg.validate();
  return SearchState(cur, ref, block, SearchWindow{cfg.window, pmv}, cfg.metric, cfg.trace);
}

void evaluate_centers(SearchState& state, Mv pmv) {
  state.evaluate({pmv, Stage::Center});
  if (pmv != Mv{}) state.evaluate({Mv{}, Stage::Center});
}

// Full lattice pass in raster order (top-left to bottom-right).
void lattice_pass(SearchState& state, Mv pmv, const SearchConfig& cfg) {
  const MlaGeometry geom(cfg.effective_d(), cfg.orientation_known, cfg.negative_odd_offset);
  auto lattice = mcp_lattice(geom, state.window());
  std::stable_sort(lattice.begin(), lattice.end(), [](const Candidate& a, const Candidate& b) {
    return a.mv.y != b.mv.y ? a.mv.y < b.mv.y : a.mv.x < b.mv.x;
  });
  for (const Candidate& c : lattice) {
    if (c.mv == pmv || c.mv == Mv{}) continue;
    state.evaluate(c);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

SearchResult full_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                         const SearchConfig& cfg) {
  SearchState state = make_state(cur, ref, block, pmv, cfg);
  const int W = cfg.window;
  for (int y = pmv.y - W; y <= pmv.y + W; ++y) {
    for (int x = pmv.x - W; x <= pmv.x + W; ++x) state.evaluate({{x, y}, Stage::Raster});
  }
  return state.finish();
}

SearchResult tzs_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                        const SearchConfig& cfg) {
  SearchState state = make_state(cur, ref, block, pmv, cfg);
  state.evaluate({Mv{}, Stage::Center});
  if (pmv != Mv{}) state.evaluate({pmv, Stage::Center});
  if (!state.has_best()) return state.finish();

  const Mv start = state.best_mv();
  int best_distance = 0;
  for (int dist = 1; dist <= cfg.window; dist *= 2) {
    const std::uint64_t before = state.best_cost();
    for (const Candidate& c : diamond_ring(start, dist, dist == 1)) state.evaluate(c);
    if (state.best_cost() < before) best_distance = dist;
  }

  if (best_distance > cfg.raster_threshold) {
    const int stride = cfg.raster_threshold;
    const int W = cfg.window;
    for (int y = pmv.y - W; y <= pmv.y + W; y += stride) {
      for (int x = pmv.x - W; x <= pmv.x + W; x += stride) state.evaluate({{x, y}, Stage::Raster});
    }
  }

  refine_star(state, 2.0 * cfg.window, cfg.max_recenter);
  return state.finish();
}

SearchResult mfme_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                         const SearchConfig& cfg) {
  SearchState state = make_state(cur, ref, block, pmv, cfg);
  evaluate_centers(state, pmv);
  lattice_pass(state, pmv, cfg);
  if (!state.has_best()) return state.finish();

  const Mv center = state.best_mv();
  const int r = cfg.square_radius;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      state.evaluate({center + Mv{dx, dy}, Stage::Refinement});
    }
  }
  return state.finish();
}

SearchResult mtss_like_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                              const SearchConfig& cfg) {
  SearchState state = make_state(cur, ref, block, pmv, cfg);
  evaluate_centers(state, pmv);
  lattice_pass(state, pmv, cfg);
  if (!state.has_best()) return state.finish();

  const Mv mcp = state.best_mv();
  const int s = static_cast<int>(std::lround(cfg.matching_distance));
  if (s > 0) {
    const Mv offsets[8] = {{s, 0}, {-s, 0}, {0, s}, {0, -s}, {s, s}, {-s, s}, {s, -s}, {-s, -s}};
    for (const Mv off : offsets) state.evaluate({mcp + off, Stage::NeighborDiamond});
  }
  const double d = cfg.effective_d();
  refine_star(state, d, cfg.max_recenter,
              RegionLimit{mcp, static_cast<int>(std::floor(d))});
  return state.finish();
}

SearchResult mcpns_search(const Frame& cur, const Frame& ref, const BlockRect& block, Mv pmv,
                          const SearchConfig& cfg) {
  SearchState state = make_state(cur, ref, block, pmv, cfg);
  const double d = cfg.effective_d();

  struct Pooled {
    Mv mv;
    std::uint64_t cost;
  };
  std::vector<Pooled> pool;
  const auto pooled_evaluate = [&](const Candidate& c) {
    if (const auto cost = state.evaluate(c)) pool.push_back({c.mv, *cost});
  };

  // Centers, then the orientation-agnostic fast MCP rings.
  pooled_evaluate({pmv, Stage::Center});
  if (pmv != Mv{}) pooled_evaluate({Mv{}, Stage::Center});
  for (const Candidate& c :
       fast_mcp_agnostic(d, state.window(), cfg.shape, cfg.negative_odd_offset)) {
    if (c.mv == pmv || c.mv == Mv{}) continue;
    pooled_evaluate(c);
  }
  if (!state.has_best()) return state.finish();

  // Neighbors search at the K lowest-cost pooled points, fixed-center
  // diamonds at distances 1, 2, 4, ..., 2^(N-1).
  if (cfg.neighbors) {
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Pooled& a, const Pooled& b) { return a.cost < b.cost; });
    const std::size_t anchors = std::min<std::size_t>(pool.size(), cfg.top_k);
    const int loops = diamond_loop_count(d);
    for (std::size_t k = 0; k < anchors; ++k) {
      const Mv anchor = pool[k].mv;
      const std::uint64_t start_cost = state.best_cost();
      for (int j = 0; j < loops; ++j) {
        const int dist = 1 << j;
        for (const Candidate& c : diamond_ring(anchor, dist, j == 0, Stage::NeighborDiamond)) {
          state.evaluate(c);
        }
        if (cfg.early_termination && dist == 8 && state.best_cost() >= start_cost) break;
      }
    }
  }

  refine_star(state, d, cfg.max_recenter);
  return state.finish();
}

SearchResult run_strategy(Strategy strategy, const Frame& cur, const Frame& ref,
                          const BlockRect& block, Mv pmv, const SearchConfig& cfg) {
  switch (strategy) {
    case Strategy::Fs: return full_search(cur, ref, block, pmv, cfg);
    case Strategy::Tzs: return tzs_search(cur, ref, block, pmv, cfg);
    case Strategy::Mfme: return mfme_search(cur, ref, block, pmv, cfg);
    case Strategy::Mtss: return mtss_like_search(cur, ref, block, pmv, cfg);
    case Strategy::Mcpns: return mcpns_search(cur, ref, block, pmv, cfg);
    case Strategy::McpnsNoNeighbors: {
      SearchConfig ablation = cfg;
      ablation.neighbors = false;
      return mcpns_search(cur, ref, block, pmv, ablation);
    }
  }
  throw Error(ErrorCategory::InvalidArgument, "unknown strategy");
}

// ---------------------------------------------------------------------------
// Frame driver
// ---------------------------------------------------------------------------

std::vector<BlockRect> tile_blocks(int width, int height, int bw, int bh) {
  if (bw < 1 || bh < 1) throw Error(ErrorCategory::InvalidArgument, "block size must be positive");
  std::vector<BlockRect> blocks;
  for (int y = 0; y < height; y += bh) {
    for (int x = 0; x < width; x += bw) {
      blocks.push_back({x, y, std::min(bw, width - x), std::min(bh, height - y)});
    }
  }
  return blocks;
}

std::vector<BlockOutcome> search_blocks(Strategy strategy, const Frame& cur, const Frame& ref,
                                        const std::vector<BlockRect>& blocks, Mv pmv,
                                        const SearchConfig& cfg, int threads) {
  cfg.validate();
  std::vector<BlockOutcome> out(blocks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < blocks.size(); i = next.fetch_add(1)) {
      const auto t0 = std::chrono::steady_clock::now();
      SearchResult result = run_strategy(strategy, cur, ref, blocks[i], pmv, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      out[i] = {i, blocks[i], std::move(result),
                std::chrono::duration<double, std::micro>(t1 - t0).count()};
    }
  };

  const int count = std::max(1, std::min<int>(threads, static_cast<int>(blocks.size())));
  if (count == 1) {
    worker();
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < count; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker();
        } catch (...) {
          errors[t] = std::current_exception();
          next.store(blocks.size());
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace plenome
