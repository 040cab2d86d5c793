#include "plenome/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "plenome/error.hpp"

namespace plenome {

using nlohmann::json;

LoadedFrames load_frames(const ExperimentConfig& cfg) {
  if (cfg.synth) {
    FramePair pair = render_pair(*cfg.synth);
    return {std::move(pair.cur), std::move(pair.ref), pair.truth};
  }
  const auto& seq = *cfg.sequence;
  return {read_yuv_luma(seq.path, seq.meta, seq.cur_frame),
          read_yuv_luma(seq.path, seq.meta, seq.ref_frame), std::nullopt};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PLENOME_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    throw Error(ErrorCategory::Usage, "PLENOME_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<EvalRecord> run_comparison(const Frame& cur, const Frame& ref,
                                       const std::vector<BlockRect>& blocks, Mv pmv,
                                       const SearchConfig& search,
                                       const std::vector<std::string>& strategies, int threads) {
  const auto oracle = search_blocks(Strategy::Fs, cur, ref, blocks, pmv, search, threads);
  std::vector<EvalRecord> records(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    records[i].block_id = i;
    records[i].oracle_mv = oracle[i].result.best_mv;
    records[i].oracle_cost = oracle[i].result.best_cost;
  }
  for (const auto& name : strategies) {
    const auto strategy = parse_strategy(name);
    if (!strategy) throw Error(ErrorCategory::Usage, "unknown strategy '" + name + "'");
    const auto outcomes = *strategy == Strategy::Fs
                              ? oracle
                              : search_blocks(*strategy, cur, ref, blocks, pmv, search, threads);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& r = outcomes[i].result;
      records[i].outcomes[name] = {r.best_mv, r.best_cost, r.points_evaluated, outcomes[i].micros,
                                   r.stage_of_best};
    }
  }
  return records;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

json estimate_report(Strategy strategy, const ExperimentConfig& cfg, const LoadedFrames& frames,
                     const std::vector<BlockOutcome>& outcomes) {
  json blocks = json::array();
  double points = 0.0;
  for (const auto& o : outcomes) {
    const auto& r = o.result;
    points += static_cast<double>(r.points_evaluated);
    blocks.push_back({{"id", o.block_id},
                      {"x0", o.block.x0},
                      {"y0", o.block.y0},
                      {"bw", o.block.bw},
                      {"bh", o.block.bh},
                      {"mv", {r.best_mv.x, r.best_mv.y}},
                      {"cost", r.best_cost},
                      {"points", r.points_evaluated},
                      {"stage", std::string(to_string(r.stage_of_best))}});
  }
  json report = {{"strategy", std::string(to_string(strategy))},
                 {"width", frames.cur.width()},
                 {"height", frames.cur.height()},
                 {"window", cfg.search.window},
                 {"d", cfg.search.effective_d()},
                 {"pmv", {cfg.pmv.x, cfg.pmv.y}},
                 {"asp", outcomes.empty() ? 0.0 : points / static_cast<double>(outcomes.size())},
                 {"blocks", blocks}};
  if (frames.truth) report["truth"] = {frames.truth->x, frames.truth->y};
  return report;
}

struct GeomSpec {
  double d = 0.0;
  Orientation orientation = Orientation::Horizontal;
  bool negative_odd_offset = false;
  DistanceNorm norm = DistanceNorm::Chebyshev;
};

GeomSpec parse_geom(const std::string& text) {
  GeomSpec g;
  bool have_d = false;
  for (const auto& part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorCategory::Usage, "--geom expects key=value pairs");
    const std::string key = part.substr(0, eq), value = part.substr(eq + 1);
    if (key == "d") {
      try {
        g.d = std::stod(value);
      } catch (const std::exception&) {
        throw Error(ErrorCategory::Usage, "--geom d must be a number");
      }
      have_d = true;
    } else if (key == "orient") {
      const auto o = parse_orientation(value);
      if (!o) throw Error(ErrorCategory::Usage, "--geom orient must be h or v");
      g.orientation = *o;
    } else if (key == "norm") {
      if (value == "chebyshev") {
        g.norm = DistanceNorm::Chebyshev;
      } else if (value == "l1") {
        g.norm = DistanceNorm::L1;
      } else {
        throw Error(ErrorCategory::Usage, "--geom norm must be chebyshev or l1");
      }
    } else if (key == "negoffset") {
      g.negative_odd_offset = value == "1" || value == "true";
    } else {
      throw Error(ErrorCategory::Usage, "--geom: unknown key '" + key + "'");
    }
  }
  if (!have_d) throw Error(ErrorCategory::Usage, "--geom requires d=<diameter>");
  return g;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const json j = read_json_file(spec_path);
  const SynthSpec spec = synth_spec_from_json(j.contains("synth") ? j.at("synth") : j);
  const FramePair pair = render_pair(spec);
  const std::filesystem::path dir(out_dir);
  write_frame_raw(pair.cur, dir / "cur.y");
  write_frame_raw(pair.ref, dir / "ref.y");
  const json meta = {{"spec", to_json(spec)},
                     {"width", spec.width},
                     {"height", spec.height},
                     {"format", "y"},
                     {"bit_depth", 8},
                     {"cur", "cur.y"},
                     {"ref", "ref.y"},
                     {"truth_mv", {pair.truth.x, pair.truth.y}},
                     {"mv_convention", "cur(x, y) == ref(x + mv.x, y + mv.y)"}};
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  out << "wrote " << (dir / "cur.y").string() << ", " << (dir / "ref.y").string()
      << "; truth_mv = (" << pair.truth.x << "," << pair.truth.y << ")\n";
  return 0;
}

int cmd_estimate(const std::string& config_path, const std::string& strategy_name,
                 const std::string& out_path, bool trace, int threads_flag, std::ostream& out) {
  ExperimentConfig cfg = load_config(config_path);
  const auto strategy = parse_strategy(strategy_name);
  if (!strategy) throw Error(ErrorCategory::Usage, "unknown strategy '" + strategy_name + "'");
  cfg.search.trace = cfg.search.trace || trace;
  const int threads = resolve_threads(threads_flag > 0 ? threads_flag : cfg.threads);

  const LoadedFrames frames = load_frames(cfg);
  const auto blocks =
      tile_blocks(frames.cur.width(), frames.cur.height(), cfg.search.block_w, cfg.search.block_h);
  const auto t0 = std::chrono::steady_clock::now();
  const auto outcomes = search_blocks(*strategy, frames.cur, frames.ref, blocks, cfg.pmv,
                                      cfg.search, threads);
  const auto t1 = std::chrono::steady_clock::now();

  write_file_atomic(out_path, estimate_report(*strategy, cfg, frames, outcomes).dump(2) + "\n");
  if (cfg.search.trace) write_trace(outcomes, out_path + ".trace");
  out << to_string(*strategy) << ": " << blocks.size() << " blocks in "
      << std::chrono::duration<double>(t1 - t0).count() << " s\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& strategy_list,
                const std::string& out_path, int threads_flag, std::ostream& out) {
  const ExperimentConfig cfg = load_config(config_path);
  const auto strategies = strategy_list.empty() ? cfg.strategies : split(strategy_list, ',');
  if (strategies.empty()) throw Error(ErrorCategory::Usage, "no strategies given");
  const int threads = resolve_threads(threads_flag > 0 ? threads_flag : cfg.threads);

  const LoadedFrames frames = load_frames(cfg);
  const auto blocks =
      tile_blocks(frames.cur.width(), frames.cur.height(), cfg.search.block_w, cfg.search.block_h);
  auto records = run_comparison(frames.cur, frames.ref, blocks, cfg.pmv, cfg.search, strategies,
                                threads);
  const MlaGeometry geom(cfg.search.effective_d(), cfg.search.orientation_known,
                         cfg.search.negative_odd_offset);
  const EvalReport report = build_report(std::move(records), strategies, geom);
  write_report(report, out_path);
  out << report_csv(report);
  return 0;
}

int cmd_analyze(const std::string& oracle_path, const std::string& geom_text,
                const std::string& out_path, std::ostream& out) {
  const GeomSpec g = parse_geom(geom_text);
  const MlaGeometry geom(g.d, g.orientation, g.negative_odd_offset);
  const json report = read_json_file(oracle_path);
  if (!report.contains("blocks") || !report.at("blocks").is_array()) {
    throw Error(ErrorCategory::ParseError, "field 'blocks': missing in " + oracle_path);
  }
  std::vector<Mv> mvs;
  for (const auto& b : report.at("blocks")) {
    try {
      const auto mv = b.at("mv").get<std::vector<int>>();
      if (mv.size() != 2) throw Error(ErrorCategory::ParseError, "field 'mv': expected [x, y]");
      mvs.push_back({mv[0], mv[1]});
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::ParseError, std::string("field 'blocks[].mv': ") + e.what());
    }
  }
  const auto buckets = deviation_buckets(mvs, geom, g.norm);
  const json stats = {{"d", g.d},
                      {"orientation", std::string(to_string(g.orientation))},
                      {"norm", g.norm == DistanceNorm::Chebyshev ? "chebyshev" : "l1"},
                      {"blocks", mvs.size()},
                      {"mcp_exact_rate", hit_rate_at_mcp(mvs, geom, 0, g.norm)},
                      {"mcp_within1_rate", hit_rate_at_mcp(mvs, geom, 1, g.norm)},
                      {"p_le_1", buckets[0]},
                      {"p_le_2", buckets[1]},
                      {"p_le_4", buckets[2]},
                      {"p_le_8", buckets[3]}};
  write_file_atomic(out_path, stats.dump(2) + "\n");
  out << stats.dump(2) << "\n";
  return 0;
}

int cmd_budget(double d, int W, int K, std::ostream& out) {
  if (W < 1) throw Error(ErrorCategory::Usage, "--W must be >= 1");
  const MlaGeometry geom(d, Orientation::Horizontal);
  out << "psi1=" << mcp_lattice_count(geom, W) << "\n"
      << "psi1_fast=" << fast_mcp_count(d, W) << "\n"
      << "psi2=" << neighbor_count(d) << "\n"
      << "psi3=" << refinement_count(d) << "\n"
      << "omega=" << total_budget(d, W, K) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion-estimation laboratory for lenslet video"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (fallback: PLENOME_THREADS)");

  std::string spec_path, out_path, config_path, strategy = "mcpns", strategies, oracle, geom;
  bool trace = false;
  double d = 23.0;
  int W = 384, K = 16;

  auto* synth = app.add_subcommand("synth", "Render a synthetic frame pair");
  synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* estimate = app.add_subcommand("estimate", "Run one strategy over every block");
  estimate->add_option("--config", config_path, "Experiment config JSON")->required();
  estimate->add_option("--strategy", strategy, "fs|tzs|mfme|mtss|mcpns|mcpns_nonb");
  estimate->add_option("--out", out_path, "Report JSON")->required();
  estimate->add_flag("--trace", trace, "Also write <out>.trace");
  estimate->add_option("--threads", threads, "Worker threads");

  auto* compare = app.add_subcommand("compare", "Compare strategies against full search");
  compare->add_option("--config", config_path, "Experiment config JSON")->required();
  compare->add_option("--strategies", strategies, "Comma-separated strategy list");
  compare->add_option("--out", out_path, "Report CSV (a .json sibling is written too)")
      ->required();
  compare->add_option("--threads", threads, "Worker threads");

  auto* analyze = app.add_subcommand("analyze", "MV distribution statistics");
  analyze->add_option("--oracle", oracle, "Full-search estimate report JSON")->required();
  analyze->add_option("--geom", geom, "d=<diameter>,orient=h|v[,norm=chebyshev|l1]")->required();
  analyze->add_option("--out", out_path, "Statistics JSON")->required();

  auto* budget = app.add_subcommand("budget", "Print candidate counts");
  budget->add_option("--d", d, "Microlens diameter")->required();
  budget->add_option("--W", W, "Window half-width")->required();
  budget->add_option("--K", K, "Top-K anchors");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[" << category_name(ErrorCategory::Usage) << "]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(spec_path, out_path, out);
    if (estimate->parsed()) return cmd_estimate(config_path, strategy, out_path, trace, threads, out);
    if (compare->parsed()) return cmd_compare(config_path, strategies, out_path, threads, out);
    if (analyze->parsed()) return cmd_analyze(oracle, geom, out_path, out);
    if (budget->parsed()) return cmd_budget(d, W, K, out);
  } catch (const Error& e) {
    err << "error[" << category_name(e.category()) << "]: " << e.what() << "\n";
    return e.category() == ErrorCategory::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace plenome
