// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plenome/cli.hpp"
#include "plenome/io.hpp"
#include "plenome/metrics.hpp"
#include "plenome/search.hpp"
#include "plenome/synth.hpp"

using namespace plenome;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared synthetic batch: 448x448 pairs with d = 35 (the Boxer preset
// diameter), 16x16 blocks whose whole W = 128 window stays inside the frame.
constexpr int kFrame = 448;
constexpr int kWindow = 128;
constexpr double kD = 35.0;
constexpr std::size_t kBatchBlocks = 500;

struct Batch {
  std::vector<EvalRecord> records;
  std::vector<std::uint64_t> cost_no_et;
  std::vector<std::size_t> points_no_et;
  std::vector<std::size_t> points_et;
  std::vector<int> oracle_deviation;  // Chebyshev distance of the oracle MV to the lattice
  std::vector<bool> unique_oracle;
};

std::vector<BlockRect> interior_blocks() {
  std::vector<BlockRect> blocks;
  for (int y = kWindow; y + 16 + kWindow <= kFrame; y += 32) {
    for (int x = kWindow; x + 16 + kWindow <= kFrame; x += 32) blocks.push_back({x, y, 16, 16});
  }
  return blocks;
}

bool oracle_is_unique(const Frame& cur, const Frame& ref, const BlockRect& block,
                      const SearchConfig& cfg) {
  SearchConfig traced = cfg;
  traced.trace = true;
  const auto fs = full_search(cur, ref, block, Mv{}, traced);
  return std::count_if(fs.trace.begin(), fs.trace.end(), [&](const TraceEntry& e) {
           return e.cost == fs.best_cost;
         }) == 1;
}

Batch make_batch(int max_deviation, std::uint32_t seed) {
  const MlaGeometry geom(kD, Orientation::Horizontal);
  std::vector<Mv> shifts;
  for (int i = 1; i <= 2; ++i) {
    for (const Mv m : ring_offsets(geom, i, RingShape::Rhombus)) shifts.push_back(m);
  }
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick_shift(0, static_cast<int>(shifts.size()) - 1);
  std::uniform_int_distribution<int> pick_dev(-max_deviation, max_deviation);

  SearchConfig cfg;
  cfg.window = kWindow;
  cfg.d = kD;
  cfg.matching_distance = kD / 2.0;
  SearchConfig no_et = cfg;
  no_et.early_termination = false;
  const std::vector<std::string> strategies = {"fs", "mfme", "mcpns", "mcpns_nonb"};
  const auto blocks = interior_blocks();

  Batch batch;
  for (std::uint64_t pair_index = 0; batch.records.size() < kBatchBlocks; ++pair_index) {
    SynthSpec spec;
    spec.width = kFrame;
    spec.height = kFrame;
    spec.d = kD;
    spec.texture_seed = 100 + pair_index;
    const Mv shift = shifts[pick_shift(rng)];
    const Mv deviation{pick_dev(rng), pick_dev(rng)};
    const auto [p, q] = geom.nearest_index(shift.x, shift.y);
    spec.motion = MotionSpec{p, q, deviation};
    const FramePair pair = render_pair(spec);

    auto records = run_comparison(pair.cur, pair.ref, blocks, Mv{}, cfg, strategies, 0);
    const auto plain = search_blocks(Strategy::Mcpns, pair.cur, pair.ref, blocks, Mv{}, no_et, 0);
    for (std::size_t i = 0; i < records.size() && batch.records.size() < kBatchBlocks; ++i) {
      records[i].block_id = batch.records.size();
      batch.cost_no_et.push_back(plain[i].result.best_cost);
      batch.points_no_et.push_back(plain[i].result.points_evaluated);
      batch.points_et.push_back(records[i].outcomes.at("mcpns").points);
      batch.oracle_deviation.push_back(lattice_distance(records[i].oracle_mv, geom));
      batch.unique_oracle.push_back(oracle_is_unique(pair.cur, pair.ref, blocks[i], cfg));
      batch.records.push_back(std::move(records[i]));
    }
  }
  return batch;
}

double hit_rate_where(const Batch& b, const std::string& strategy) {
  std::size_t counted = 0, hits = 0;
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    if (!b.unique_oracle[i]) continue;
    ++counted;
    if (b.records[i].outcomes.at(strategy).cost == b.records[i].oracle_cost) ++hits;
  }
  return counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
}

// 1. Count exactness.
Verdict count_exactness() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code = run_cli({"budget", "--d", "23", "--W", "384", "--K", "16"}, out, err);
  const std::string text = out.str();
  v.require(code == 0, "budget exit code " + std::to_string(code));
  v.require(text.find("psi1=1307\n") != std::string::npos, "psi1 != 1307");
  v.require(text.find("psi1_fast=128\n") != std::string::npos, "psi1_fast != 128");

  int checked = 0;
  for (const double d : {10.0, 16.0, 23.0, 35.0, 72.0}) {
    for (const int W : {32, 64, 128, 384}) {
      const MlaGeometry geom(d, Orientation::Horizontal);
      const auto enumerated = static_cast<std::int64_t>(mcp_lattice_unrounded(geom, W).size());
      const auto closed = mcp_lattice_count(geom, W);
      v.require(enumerated == closed, "d=" + std::to_string(d) + " W=" + std::to_string(W) +
                                          ": enumerated " + std::to_string(enumerated) +
                                          " vs closed form " + std::to_string(closed));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 1.0, fmt("runtime %.2f s >= 1 s", secs));
  v.note(std::to_string(checked) + " grid points, " + fmt("%.3f s", secs));
  return v;
}

// 2. Oracle equivalence on lattice motion.
Verdict lattice_equivalence(const Batch& b, double secs) {
  Verdict v;
  const double mcpns = hit_rate_where(b, "mcpns");
  const double mfme = hit_rate_where(b, "mfme");
  const double ape_fs = ape(b.records, "fs");
  const auto unique = std::count(b.unique_oracle.begin(), b.unique_oracle.end(), true);
  v.require(mcpns >= 0.99, fmt("MCPNS hit %.3f < 0.99", mcpns));
  v.require(mfme >= 0.99, fmt("MFME hit %.3f < 0.99", mfme));
  v.require(ape_fs == 0.0, fmt("APE(FS) = %g", ape_fs));
  v.require(secs < 60.0, fmt("runtime %.1f s >= 60 s", secs));
  v.note(fmt("%g blocks (%g with a unique optimum)", static_cast<double>(b.records.size()),
             static_cast<double>(unique)));
  v.note(fmt("hit MCPNS %.3f MFME %.3f", mcpns, mfme));
  v.note(fmt("%.1f s", secs));
  return v;
}

// 3. Deviation robustness ordering.
Verdict deviation_ordering(const Batch& b, double secs) {
  Verdict v;
  const double hit_mcpns = hit_rate(b.records, "mcpns");
  const double hit_ablation = hit_rate(b.records, "mcpns_nonb");
  const double ape_mcpns = ape(b.records, "mcpns");
  const double ape_mfme = ape(b.records, "mfme");
  v.require(hit_mcpns > hit_ablation, "hit(MCPNS) <= hit(no-neighbors)");
  v.require(ape_mcpns < ape_mfme, "APE(MCPNS) >= APE(MFME)");
  v.require(secs < 120.0, fmt("runtime %.1f s >= 120 s", secs));
  v.note(fmt("hit MCPNS %.3f vs no-neighbors %.3f", hit_mcpns, hit_ablation));
  v.note(fmt("APE MCPNS %.2f vs MFME %.2f", ape_mcpns, ape_mfme));
  v.note(fmt("%.1f s", secs));
  return v;
}

// 4. Budget conformance.
Verdict budget_conformance() {
  Verdict v;
  constexpr double d = 23.0;
  constexpr int W = 384;
  constexpr int K = 16;
  const int psi2 = neighbor_count(d);
  const int psi3 = refinement_count(d);
  const auto omega = total_budget(d, W, K);
  const std::int64_t bound = 2 + 2 * fast_mcp_count(d, W) + K * psi2 + psi3;
  v.require(bound == omega + 2, "non-dedup bound " + std::to_string(bound) + " != omega + 2");
  v.require(bound == 734, "non-dedup bound " + std::to_string(bound) + " != 734");

  // A window of 384 plus refinement reach needs a large frame. The predicted
  // MV is off the lattice so the two centers are distinct.
  const Mv pmv{1, 0};
  SynthSpec spec;
  spec.width = 832;
  spec.height = 832;
  spec.d = d;
  spec.motion = MotionSpec{1, 0, Mv{}};
  const FramePair pair = render_pair(spec);
  SearchConfig cfg;
  cfg.window = W;
  cfg.d = d;
  cfg.top_k = K;
  cfg.early_termination = false;
  cfg.trace = true;

  const BlockRect blocks[] = {{400, 400, 16, 16}, {408, 392, 16, 16}, {392, 416, 16, 16}};
  int checked = 0;
  for (const BlockRect& block : blocks) {
    const auto r = mcpns_search(pair.cur, pair.ref, block, pmv, cfg);
    SearchState probe(pair.cur, pair.ref, block, SearchWindow{W, pmv}, CostMetric::Sad, false);
    std::int64_t fast = 0;
    for (const Candidate& c : fast_mcp_agnostic(d, SearchWindow{W, pmv}, RingShape::Rhombus)) {
      if (probe.feasible(c.mv)) ++fast;
    }
    const auto expected = 2 + fast + K * psi2 + static_cast<std::int64_t>(r.refine_passes) * psi3;
    v.require(r.trace.size() == r.points_evaluated, "trace length != points_evaluated");
    v.require(static_cast<std::int64_t>(r.points_evaluated) == expected,
              "block at (" + std::to_string(block.x0) + "," + std::to_string(block.y0) +
                  "): " + std::to_string(r.points_evaluated) + " points vs " +
                  std::to_string(expected) + " expected");
    v.require(r.refine_passes >= 1, "no refinement pass");
    v.require(static_cast<std::int64_t>(r.points_evaluated) <= bound, "points exceed bound");
    ++checked;
  }
  v.note("bound " + std::to_string(bound) + " = omega " + std::to_string(omega) + " + 2");
  v.note(std::to_string(checked) + " blocks match 2 + |fast| + K*psi2 + r*psi3");
  return v;
}

// 5. Transpose / orientation property.
Verdict transpose_property() {
  Verdict v;
  std::set<double> diameters;
  for (const auto& preset : sequence_presets()) diameters.insert(preset.d);
  for (const double d : diameters) {
    for (const int W : {64, 128, 384}) {
     for (const RingShape shape : {RingShape::Rhombus, RingShape::Hexagon}) {
      const SearchWindow window{W, Mv{}};
      std::set<Mv> h_transposed, vertical;
      for (const auto& c : fast_mcp_rings(MlaGeometry(d, Orientation::Horizontal), window, shape)) {
        h_transposed.insert(c.mv.transposed());
      }
      for (const auto& c : fast_mcp_rings(MlaGeometry(d, Orientation::Vertical), window, shape)) {
        vertical.insert(c.mv);
      }
      v.require(h_transposed == vertical, fmt("set mismatch at d=%.2f W=%g", d, W));
     }
    }
  }

  SearchConfig cfg;
  cfg.window = 64;
  cfg.d = 23.30;
  const auto blocks = [] {
    std::vector<BlockRect> out;
    for (int y = 64; y + 16 + 64 <= 256; y += 24) {
      for (int x = 64; x + 16 + 64 <= 256; x += 24) out.push_back({x, y, 16, 16});
    }
    return out;
  }();
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> dev(-6, 6);
  int checked = 0, skipped = 0, matched = 0;
  for (std::uint64_t seed = 1; checked < 100; ++seed) {
    SynthSpec spec;
    spec.texture_seed = seed;
    spec.motion = MotionSpec{static_cast<long>(seed % 3) - 1, 1, Mv{dev(rng), dev(rng)}};
    const FramePair pair = render_pair(spec);
    const Frame cur_t = pair.cur.transposed();
    const Frame ref_t = pair.ref.transposed();
    for (const BlockRect& block : blocks) {
      if (checked >= 100) break;
      if (!oracle_is_unique(pair.cur, pair.ref, block, cfg)) {
        ++skipped;
        continue;
      }
      const auto a = mcpns_search(pair.cur, pair.ref, block, Mv{}, cfg);
      const auto b = mcpns_search(cur_t, ref_t, block.transposed(), Mv{}, cfg);
      ++checked;
      if (b.best_mv == a.best_mv.transposed() && a.best_cost == b.best_cost) ++matched;
    }
  }
  v.require(matched == checked, fmt("%g of %g blocks transposed", matched, checked));
  v.note(fmt("%g diameters set-equal", static_cast<double>(diameters.size())));
  v.note(fmt("%g/%g blocks transposed (%g skipped: tied optimum)", matched, checked, skipped));
  return v;
}

// 6. Early-termination safety.
Verdict early_termination(const Batch& b) {
  Verdict v;
  std::size_t eligible = 0, worse = 0;
  double pts_et = 0.0, pts_plain = 0.0;
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    pts_et += static_cast<double>(b.points_et[i]);
    pts_plain += static_cast<double>(b.points_no_et[i]);
    if (b.oracle_deviation[i] > 8) continue;
    ++eligible;
    if (b.records[i].outcomes.at("mcpns").cost > b.cost_no_et[i]) ++worse;
  }
  const double ratio = pts_et / pts_plain;
  v.require(worse == 0, fmt("early termination raised the cost on %g of %g blocks",
                            static_cast<double>(worse), static_cast<double>(eligible)));
  v.require(ratio < 1.0, fmt("points ratio %.3f is not below 1", ratio));
  v.note(fmt("mean points with/without early termination = %.3f", ratio));
  return v;
}

// 7. Metrics identities.
Verdict metrics_identities(const Batch& lattice, const fs::path& scratch) {
  Verdict v;
  v.require(ape(lattice.records, "fs") == 0.0, "APE(FS) != 0");

  SynthSpec spec;
  spec.width = 64;
  spec.height = 64;
  spec.d = 10.0;
  spec.motion = MotionSpec{1, 0, Mv{1, 1}};
  const FramePair pair = render_pair(spec);
  SearchConfig cfg;
  cfg.window = 8;
  cfg.d = 10.0;
  std::vector<BlockRect> interior;
  for (int y = 8; y + 16 + 8 <= 64; y += 8) {
    for (int x = 8; x + 16 + 8 <= 64; x += 8) interior.push_back({x, y, 16, 16});
  }
  const auto records = run_comparison(pair.cur, pair.ref, interior, Mv{}, cfg, {"fs", "mcpns"}, 1);
  const double asp_fs = asp(records, "fs");
  v.require(asp_fs == 289.0, fmt("ASP(FS, W=8) = %g", asp_fs));
  const double self = wall_ratio(records, "fs", "fs");
  v.require(std::abs(self - 100.0) < 1e-9, fmt("wall_ratio(anchor, anchor) = %g", self));

  // Bucket monotonicity on analyze runs over estimate reports.
  int runs = 0;
  for (const auto& [orient, norm] : std::vector<std::pair<std::string, std::string>>{
           {"h", "chebyshev"}, {"h", "l1"}, {"v", "chebyshev"}}) {
    ExperimentConfig ec;
    SynthSpec s;
    s.width = 128;
    s.height = 128;
    s.motion = MotionSpec{1, 1, Mv{2, -1}};
    ec.synth = s;
    ec.search.window = 16;
    ec.search.d = s.d;
    ec.strategies = {"fs"};
    const fs::path config = scratch / "analyze_config.json";
    const fs::path oracle = scratch / "oracle.json";
    const fs::path stats = scratch / ("stats_" + orient + norm + ".json");
    write_file_atomic(config, to_json(ec).dump(2));
    std::ostringstream out, err;
    const int est = run_cli({"estimate", "--config", config.string(), "--strategy", "fs", "--out",
                             oracle.string(), "--threads", "1"},
                            out, err);
    v.require(est == 0, "estimate failed: " + err.str());
    const int an = run_cli({"analyze", "--oracle", oracle.string(), "--geom",
                            "d=23.30,orient=" + orient + ",norm=" + norm, "--out", stats.string()},
                           out, err);
    v.require(an == 0, "analyze failed: " + err.str());
    if (an != 0) continue;
    const auto j = read_json_file(stats);
    const double p1 = j.at("p_le_1"), p2 = j.at("p_le_2"), p4 = j.at("p_le_4"), p8 = j.at("p_le_8");
    v.require(p1 <= p2 && p2 <= p4 && p4 <= p8, "bucket order violated (" + orient + "," + norm + ")");
    ++runs;
  }
  v.note(fmt("ASP(FS) %g over %g blocks", asp_fs, static_cast<double>(records.size())));
  v.note(fmt("%g analyze runs monotone", runs));
  return v;
}

nlohmann::json without_wall_fields(nlohmann::json report) {
  for (auto& row : report.at("strategies")) {
    row.erase("mean_wall_us");
    row.erase("search_time_ratio_fs");
    row.erase("search_time_ratio_tzs");
  }
  return report;
}

// 8. Determinism across thread counts.
Verdict determinism(const fs::path& scratch) {
  Verdict v;
  int runs = 0;
  for (const auto& strategies :
       std::vector<std::string>{"fs,tzs,mfme,mtss,mcpns,mcpns_nonb", "fs,mcpns"}) {
    ExperimentConfig ec;
    SynthSpec s;
    s.width = 192;
    s.height = 160;
    s.d = 23.30;
    s.texture_seed = 5 + runs;
    s.noise_sigma = 2.0;
    s.motion = MotionSpec{1, -1, Mv{3, 2}};
    ec.synth = s;
    ec.search.window = 32;
    ec.search.d = s.d;
    ec.search.matching_distance = s.d / 2.0;
    ec.strategies = {"fs"};
    const fs::path config = scratch / "det_config.json";
    write_file_atomic(config, to_json(ec).dump(2));
    std::string csv_no_wall[2];
    nlohmann::json json_no_wall[2];
    for (int t = 0; t < 2; ++t) {
      const fs::path out_csv = scratch / ("det_" + std::to_string(t) + ".csv");
      std::ostringstream out, err;
      const int code = run_cli({"compare", "--config", config.string(), "--strategies", strategies,
                                "--out", out_csv.string(), "--threads", t == 0 ? "1" : "8"},
                               out, err);
      v.require(code == 0, "compare failed: " + err.str());
      if (code != 0) return v;
      json_no_wall[t] = without_wall_fields(read_json_file(fs::path(out_csv).replace_extension(".json")));
      // CSV: keep the first six columns, drop the wall-time ones.
      std::istringstream rows(out.str());
      std::string line;
      while (std::getline(rows, line)) {
        std::size_t pos = 0;
        for (int col = 0; col < 6 && pos != std::string::npos; ++col) pos = line.find(',', pos + 1);
        csv_no_wall[t] += line.substr(0, pos) + "\n";
      }
    }
    v.require(json_no_wall[0] == json_no_wall[1], "JSON reports differ for " + strategies);
    v.require(csv_no_wall[0] == csv_no_wall[1], "CSV reports differ for " + strategies);
    ++runs;
  }
  v.note(fmt("%g compare runs identical at 1 and 8 threads", runs));
  return v;
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "plenome_acceptance";
  fs::create_directories(scratch);

  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Verdict()>& run) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failures;
    std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "count exactness", count_exactness);

  auto t0 = std::chrono::steady_clock::now();
  const Batch lattice = make_batch(0, 5);
  const double lattice_secs = seconds_since(t0);
  report(2, "oracle equivalence on lattice motion",
         [&] { return lattice_equivalence(lattice, lattice_secs); });

  t0 = std::chrono::steady_clock::now();
  const Batch deviated = make_batch(8, 6);
  const double deviated_secs = seconds_since(t0);
  report(3, "deviation robustness ordering",
         [&] { return deviation_ordering(deviated, deviated_secs); });

  report(4, "budget conformance", budget_conformance);
  report(5, "transpose and orientation", transpose_property);
  report(6, "early-termination safety", [&] { return early_termination(deviated); });
  report(7, "metrics identities", [&] { return metrics_identities(lattice, scratch); });
  report(8, "determinism", [&] { return determinism(scratch); });

  fs::remove_all(scratch);
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
