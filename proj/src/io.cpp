#include "plenome/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "plenome/error.hpp"

namespace plenome {

using nlohmann::json;

std::size_t SequenceMeta::frame_bytes() const {
  const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  return format == PlanarFormat::Y ? luma : luma * 3 / 2;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

const std::vector<SequenceMeta>& sequence_presets() {
  static const std::vector<SequenceMeta> presets = [] {
    const auto make = [](std::string name, int w, int h, double d, Orientation o, double s) {
      SequenceMeta m;
      m.name = std::move(name);
      m.width = w;
      m.height = h;
      m.format = PlanarFormat::Yuv420;
      m.d = d;
      m.orientation = o;
      m.s = s;
      m.fps = 30.0;
      return m;
    };
    const auto V = Orientation::Vertical, H = Orientation::Horizontal;
    return std::vector<SequenceMeta>{
        make("raytrix_r5_tunnel", 2048, 2048, 23.30, V, 24),
        make("raytrix_r5_origami", 2048, 2048, 23.30, V, 21),
        make("raytrix_r5_fujita", 2048, 2048, 23.30, V, 23),
        make("raytrix_r5_dataleading", 2048, 2048, 23.20, V, 19),
        make("raytrix_r8_boxer", 3840, 2160, 35.00, H, 18),
        make("raytrix_r8_chesspieces", 3840, 2160, 35.00, H, 16),
        make("raytrix_r8_chessmoving", 3840, 2160, 35.00, H, 18),
        make("single_focused_boys", 4080, 3068, 72.38, V, 87),
        make("single_focused_experiments", 4080, 3068, 72.38, V, 92),
        make("single_focused_cars", 4080, 3068, 70.25, V, 87),
        make("single_focused_matryoshka", 4080, 3068, 70.25, V, 95),
    };
  }();
  return presets;
}

std::optional<SequenceMeta> find_preset(std::string_view key) {
  for (const auto& p : sequence_presets()) {
    if (p.name == key) return p;
  }
  return std::nullopt;
}

std::string preset_key(const SequenceMeta& meta) { return meta.name; }

// ---------------------------------------------------------------------------
// Raw frames
// ---------------------------------------------------------------------------

Frame read_yuv_luma(const std::filesystem::path& path, const SequenceMeta& meta, int frame_index) {
  if (meta.bit_depth != 8) {
    throw Error(ErrorCategory::UnsupportedFormat,
                "only 8-bit input is supported, got " + std::to_string(meta.bit_depth) + "-bit");
  }
  if (meta.width <= 0 || meta.height <= 0) {
    throw Error(ErrorCategory::InvalidArgument, "sequence dimensions must be positive");
  }
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCategory::IoError, "cannot stat " + path.string() + ": " + ec.message());

  const std::size_t frame_bytes = meta.frame_bytes();
  std::size_t frames = static_cast<std::size_t>(meta.frame_count);
  if (frames == 0) {
    if (size == 0 || size % frame_bytes != 0) {
      throw Error(ErrorCategory::SizeMismatch,
                  path.string() + " is not a whole number of frames");
    }
    frames = size / frame_bytes;
  } else if (size != frames * frame_bytes) {
    throw Error(ErrorCategory::SizeMismatch, path.string() + " has " + std::to_string(size) +
                                                 " bytes, expected " +
                                                 std::to_string(frames * frame_bytes));
  }
  if (frame_index < 0 || static_cast<std::size_t>(frame_index) >= frames) {
    throw Error(ErrorCategory::IndexOutOfRange,
                "frame " + std::to_string(frame_index) + " of " + std::to_string(frames));
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::IoError, "cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(frame_bytes * static_cast<std::size_t>(frame_index)));
  std::vector<std::uint8_t> luma(static_cast<std::size_t>(meta.width) * meta.height);
  in.read(reinterpret_cast<char*>(luma.data()), static_cast<std::streamsize>(luma.size()));
  if (in.gcount() != static_cast<std::streamsize>(luma.size())) {
    throw Error(ErrorCategory::IoError, "short read from " + path.string());
  }
  return Frame(meta.width, meta.height, std::move(luma));
}

void write_frame_raw(const Frame& frame, const std::filesystem::path& path) {
  const auto luma = frame.luma();
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(luma.data()), luma.size()));
}

Frame read_frame_raw(const std::filesystem::path& path, int width, int height) {
  SequenceMeta meta;
  meta.width = width;
  meta.height = height;
  meta.format = PlanarFormat::Y;
  meta.frame_count = 1;
  return read_yuv_luma(path, meta, 0);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCategory::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCategory::IoError, "cannot rename to " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCategory::ParseError, "field '" + field + "': " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!names.count(item.key())) {
      parse_fail(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
    }
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

template <typename T>
T get(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) parse_fail(path_of(where, key), "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(path_of(where, key), e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& where, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, where, key) : fallback;
}

Mv get_mv(const json& j, const std::string& where, const char* key, Mv fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get<std::vector<int>>(j, where, key);
  if (v.size() != 2) parse_fail(path_of(where, key), "expected [x, y]");
  return {v[0], v[1]};
}

Orientation get_orientation(const json& j, const std::string& where, const char* key,
                            Orientation fallback) {
  if (!j.contains(key)) return fallback;
  const auto o = parse_orientation(get<std::string>(j, where, key));
  if (!o) parse_fail(path_of(where, key), "expected 'horizontal' or 'vertical'");
  return *o;
}

SequenceInput sequence_from_json(const json& j) {
  const std::string where = "sequence";
  check_keys(j, where,
             {"path", "preset", "name", "width", "height", "frame_count", "format", "bit_depth", "d",
              "orientation", "s", "fps", "cur_frame", "ref_frame"});
  SequenceInput in;
  in.path = get<std::string>(j, where, "path");
  if (j.contains("preset")) {
    const auto key = get<std::string>(j, where, "preset");
    const auto preset = find_preset(key);
    if (!preset) parse_fail(where + ".preset", "unknown preset '" + key + "'");
    in.meta = *preset;
  } else {
    in.meta.name = get_or<std::string>(j, where, "name", "sequence");
    in.meta.width = get<int>(j, where, "width");
    in.meta.height = get<int>(j, where, "height");
    in.meta.d = get<double>(j, where, "d");
  }
  in.meta.name = get_or<std::string>(j, where, "name", in.meta.name);
  in.meta.width = get_or<int>(j, where, "width", in.meta.width);
  in.meta.height = get_or<int>(j, where, "height", in.meta.height);
  in.meta.d = get_or<double>(j, where, "d", in.meta.d);
  in.meta.frame_count = get_or<int>(j, where, "frame_count", in.meta.frame_count);
  in.meta.bit_depth = get_or<int>(j, where, "bit_depth", in.meta.bit_depth);
  in.meta.fps = get_or<double>(j, where, "fps", in.meta.fps);
  in.meta.orientation = get_orientation(j, where, "orientation", in.meta.orientation);
  if (j.contains("s")) in.meta.s = get<double>(j, where, "s");
  if (j.contains("format")) {
    const auto f = get<std::string>(j, where, "format");
    if (f == "y") {
      in.meta.format = PlanarFormat::Y;
    } else if (f == "yuv420") {
      in.meta.format = PlanarFormat::Yuv420;
    } else {
      parse_fail(where + ".format", "expected 'y' or 'yuv420'");
    }
  }
  if (in.meta.bit_depth != 8) {
    throw Error(ErrorCategory::UnsupportedFormat, "only 8-bit sequences are supported");
  }
  in.cur_frame = get_or<int>(j, where, "cur_frame", 1);
  in.ref_frame = get_or<int>(j, where, "ref_frame", 0);
  return in;
}

json sequence_to_json(const SequenceInput& in) {
  json j = {{"path", in.path},
            {"name", in.meta.name},
            {"width", in.meta.width},
            {"height", in.meta.height},
            {"frame_count", in.meta.frame_count},
            {"format", in.meta.format == PlanarFormat::Y ? "y" : "yuv420"},
            {"bit_depth", in.meta.bit_depth},
            {"d", in.meta.d},
            {"orientation", std::string(to_string(in.meta.orientation))},
            {"fps", in.meta.fps},
            {"cur_frame", in.cur_frame},
            {"ref_frame", in.ref_frame}};
  if (in.meta.s) j["s"] = *in.meta.s;
  return j;
}

}  // namespace

bool operator==(const SynthSpec& a, const SynthSpec& b) {
  return a.width == b.width && a.height == b.height && a.d == b.d &&
         a.orientation == b.orientation && a.texture_seed == b.texture_seed &&
         a.texture == b.texture && a.vignette == b.vignette &&
         a.motion.lattice_p == b.motion.lattice_p && a.motion.lattice_q == b.motion.lattice_q &&
         a.motion.deviation == b.motion.deviation && a.noise_sigma == b.noise_sigma &&
         a.noise_seed == b.noise_seed && a.matching_distance == b.matching_distance;
}

bool operator==(const SearchConfig& a, const SearchConfig& b) {
  return a.window == b.window && a.d == b.d && a.integer_d == b.integer_d && a.shape == b.shape &&
         a.top_k == b.top_k && a.matching_distance == b.matching_distance &&
         a.orientation_known == b.orientation_known &&
         a.negative_odd_offset == b.negative_odd_offset && a.block_w == b.block_w &&
         a.block_h == b.block_h && a.early_termination == b.early_termination &&
         a.raster_threshold == b.raster_threshold && a.square_radius == b.square_radius &&
         a.max_recenter == b.max_recenter && a.neighbors == b.neighbors && a.metric == b.metric &&
         a.trace == b.trace;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.synth == b.synth && a.sequence == b.sequence && a.search == b.search &&
         a.strategies == b.strategies && a.pmv == b.pmv && a.threads == b.threads &&
         a.output == b.output;
}

json to_json(const SynthSpec& spec) {
  return {{"width", spec.width},
          {"height", spec.height},
          {"d", spec.d},
          {"orientation", std::string(to_string(spec.orientation))},
          {"texture_seed", spec.texture_seed},
          {"texture", spec.texture == Texture::Procedural ? "procedural" : "constant"},
          {"vignette", spec.vignette},
          {"lattice_shift", {spec.motion.lattice_p, spec.motion.lattice_q}},
          {"deviation", {spec.motion.deviation.x, spec.motion.deviation.y}},
          {"noise_sigma", spec.noise_sigma},
          {"noise_seed", spec.noise_seed},
          {"matching_distance", spec.matching_distance}};
}

SynthSpec synth_spec_from_json(const json& j) {
  const std::string where = "synth";
  check_keys(j, where,
             {"width", "height", "d", "orientation", "texture_seed", "texture", "vignette",
              "lattice_shift", "deviation", "noise_sigma", "noise_seed", "matching_distance"});
  SynthSpec spec;
  spec.width = get<int>(j, where, "width");
  spec.height = get<int>(j, where, "height");
  spec.d = get<double>(j, where, "d");
  spec.orientation = get_orientation(j, where, "orientation", spec.orientation);
  spec.texture_seed = get_or<std::uint64_t>(j, where, "texture_seed", spec.texture_seed);
  if (j.contains("texture")) {
    const auto t = get<std::string>(j, where, "texture");
    if (t == "procedural") {
      spec.texture = Texture::Procedural;
    } else if (t == "constant") {
      spec.texture = Texture::Constant;
    } else {
      parse_fail(where + ".texture", "expected 'procedural' or 'constant'");
    }
  }
  spec.vignette = get_or<bool>(j, where, "vignette", spec.vignette);
  const Mv shift = get_mv(j, where, "lattice_shift", Mv{});
  spec.motion.lattice_p = shift.x;
  spec.motion.lattice_q = shift.y;
  spec.motion.deviation = get_mv(j, where, "deviation", Mv{});
  spec.noise_sigma = get_or<double>(j, where, "noise_sigma", spec.noise_sigma);
  spec.noise_seed = get_or<std::uint64_t>(j, where, "noise_seed", spec.noise_seed);
  spec.matching_distance = get_or<double>(j, where, "matching_distance", spec.matching_distance);
  try {
    spec.validate();
  } catch (const Error& e) {
    parse_fail(where, e.what());
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (synth.has_value() == sequence.has_value()) {
    throw Error(ErrorCategory::ParseError, "exactly one of 'synth' or 'sequence' is required");
  }
  if (strategies.empty()) throw Error(ErrorCategory::ParseError, "field 'strategies': empty");
  for (const auto& s : strategies) {
    if (!parse_strategy(s)) {
      throw Error(ErrorCategory::ParseError, "field 'strategies': unknown strategy '" + s + "'");
    }
  }
  if (threads < 0) throw Error(ErrorCategory::ParseError, "field 'threads': must be >= 0");
  search.validate();
}

ExperimentConfig config_from_json(const json& j, bool check_files) {
  check_keys(j, "",
             {"synth", "sequence", "block_width", "block_height", "window", "strategies", "search",
              "pmv", "threads", "trace", "output"});
  ExperimentConfig cfg;
  if (j.contains("synth")) cfg.synth = synth_spec_from_json(j.at("synth"));
  if (j.contains("sequence")) cfg.sequence = sequence_from_json(j.at("sequence"));
  if (!cfg.synth && !cfg.sequence) parse_fail("synth", "missing required field (or 'sequence')");

  cfg.search.window = get<int>(j, "", "window");
  cfg.search.block_w = get_or<int>(j, "", "block_width", 16);
  cfg.search.block_h = get_or<int>(j, "", "block_height", 16);
  cfg.search.trace = get_or<bool>(j, "", "trace", false);
  cfg.strategies = get<std::vector<std::string>>(j, "", "strategies");
  cfg.pmv = get_mv(j, "", "pmv", Mv{});
  cfg.threads = get_or<int>(j, "", "threads", 0);
  cfg.output = get_or<std::string>(j, "", "output", "");

  // Camera parameters default from the input.
  if (cfg.synth) {
    cfg.search.d = cfg.synth->d;
    cfg.search.orientation_known = cfg.synth->orientation;
    cfg.search.matching_distance =
        cfg.synth->matching_distance > 0.0 ? cfg.synth->matching_distance : cfg.synth->d / 2.0;
  } else {
    cfg.search.d = cfg.sequence->meta.d;
    cfg.search.orientation_known = cfg.sequence->meta.orientation;
    cfg.search.matching_distance = cfg.sequence->meta.s.value_or(0.0);
  }

  if (j.contains("search")) {
    const json& s = j.at("search");
    const std::string where = "search";
    check_keys(s, where,
               {"d", "integer_d", "shape", "K", "s", "orientation", "negative_odd_offset",
                "early_termination", "raster_threshold", "square_radius", "max_recenter",
                "neighbors", "metric"});
    auto& sc = cfg.search;
    sc.d = get_or<double>(s, where, "d", sc.d);
    sc.integer_d = get_or<bool>(s, where, "integer_d", sc.integer_d);
    if (s.contains("shape")) {
      const auto shape = parse_ring_shape(get<std::string>(s, where, "shape"));
      if (!shape) parse_fail("search.shape", "expected 'rhombus' or 'hexagon'");
      sc.shape = *shape;
    }
    sc.top_k = get_or<int>(s, where, "K", sc.top_k);
    sc.matching_distance = get_or<double>(s, where, "s", sc.matching_distance);
    sc.orientation_known = get_orientation(s, where, "orientation", sc.orientation_known);
    sc.negative_odd_offset = get_or<bool>(s, where, "negative_odd_offset", sc.negative_odd_offset);
    sc.early_termination = get_or<bool>(s, where, "early_termination", sc.early_termination);
    sc.raster_threshold = get_or<int>(s, where, "raster_threshold", sc.raster_threshold);
    sc.square_radius = get_or<int>(s, where, "square_radius", sc.square_radius);
    sc.max_recenter = get_or<int>(s, where, "max_recenter", sc.max_recenter);
    sc.neighbors = get_or<bool>(s, where, "neighbors", sc.neighbors);
    if (s.contains("metric")) {
      const auto m = parse_cost_metric(get<std::string>(s, where, "metric"));
      if (!m) parse_fail("search.metric", "expected 'sad' or 'ssd'");
      sc.metric = *m;
    }
  }

  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::ParseError) throw;
    throw Error(ErrorCategory::ParseError, e.what());
  }
  if (check_files && cfg.sequence && !std::filesystem::exists(cfg.sequence->path)) {
    throw Error(ErrorCategory::IoError, "sequence file not found: " + cfg.sequence->path);
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& sc = cfg.search;
  json j = {{"block_width", sc.block_w},
            {"block_height", sc.block_h},
            {"window", sc.window},
            {"strategies", cfg.strategies},
            {"pmv", {cfg.pmv.x, cfg.pmv.y}},
            {"threads", cfg.threads},
            {"trace", sc.trace},
            {"output", cfg.output},
            {"search",
             {{"d", sc.d},
              {"integer_d", sc.integer_d},
              {"shape", std::string(to_string(sc.shape))},
              {"K", sc.top_k},
              {"s", sc.matching_distance},
              {"orientation", std::string(to_string(sc.orientation_known))},
              {"negative_odd_offset", sc.negative_odd_offset},
              {"early_termination", sc.early_termination},
              {"raster_threshold", sc.raster_threshold},
              {"square_radius", sc.square_radius},
              {"max_recenter", sc.max_recenter},
              {"neighbors", sc.neighbors},
              {"metric", std::string(to_string(sc.metric))}}}};
  if (cfg.synth) j["synth"] = to_json(*cfg.synth);
  if (cfg.sequence) j["sequence"] = sequence_to_json(*cfg.sequence);
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCategory::ParseError, path.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json to_json(const EvalReport& report) {
  json strategies = json::array();
  for (const auto& s : report.strategies) {
    json row = {{"name", s.name},
                {"blocks", s.blocks},
                {"asp", s.asp},
                {"ape", s.ape},
                {"hit_rate", s.hit_rate},
                {"cost_excess_mean", s.cost_excess_mean},
                {"mean_wall_us", s.mean_micros}};
    row["search_time_ratio_fs"] = s.wall_ratio_fs ? json(*s.wall_ratio_fs) : json(nullptr);
    row["search_time_ratio_tzs"] = s.wall_ratio_tzs ? json(*s.wall_ratio_tzs) : json(nullptr);
    strategies.push_back(std::move(row));
  }
  return {{"block_count", report.block_count},
          {"strategies", strategies},
          {"oracle_distribution",
           {{"mcp_exact_rate", report.mcp_exact_rate},
            {"mcp_within1_rate", report.mcp_within1_rate},
            {"p_le_1", report.buckets[0]},
            {"p_le_2", report.buckets[1]},
            {"p_le_4", report.buckets[2]},
            {"p_le_8", report.buckets[3]}}}};
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << kReportCsvHeader << '\n';
  out << std::setprecision(10);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  for (const auto& s : report.strategies) {
    out << s.name << ',' << s.blocks << ',' << s.asp << ',' << s.ape << ',' << s.hit_rate << ','
        << s.cost_excess_mean << ',' << s.mean_micros << ',';
    opt(s.wall_ratio_fs);
    out << ',';
    opt(s.wall_ratio_tzs);
    out << '\n';
  }
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    write_file_atomic(path, report_csv(report));
    std::filesystem::path json_path = path;
    json_path.replace_extension(".json");
    write_file_atomic(json_path, to_json(report).dump(2) + "\n");
  } else {
    write_file_atomic(path, to_json(report).dump(2) + "\n");
  }
}

std::string trace_text(std::size_t block_id, const SearchResult& result) {
  std::ostringstream out;
  for (const auto& e : result.trace) {
    out << block_id << ' ' << to_string(e.candidate.stage) << ' ' << e.candidate.mv.x << ' '
        << e.candidate.mv.y << ' ' << e.cost << '\n';
  }
  return out.str();
}

void write_trace(const std::vector<BlockOutcome>& outcomes, const std::filesystem::path& path) {
  std::string text;
  for (const auto& o : outcomes) text += trace_text(o.block_id, o.result);
  write_file_atomic(path, text);
}

}  // namespace plenome
