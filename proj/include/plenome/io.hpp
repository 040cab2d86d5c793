#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plenome/cost.hpp"
#include "plenome/geometry.hpp"
#include "plenome/metrics.hpp"
#include "plenome/search.hpp"
#include "plenome/synth.hpp"

#include <json.hpp>

namespace plenome {

enum class PlanarFormat { Y, Yuv420 };

struct SequenceMeta {
  std::string name;
  int width = 0;
  int height = 0;
  int frame_count = 0;  // 0: infer from the file size
  PlanarFormat format = PlanarFormat::Yuv420;
  int bit_depth = 8;
  double d = 0.0;
  Orientation orientation = Orientation::Horizontal;
  std::optional<double> s;
  double fps = 30.0;

  std::size_t frame_bytes() const;
  friend bool operator==(const SequenceMeta&, const SequenceMeta&) = default;
};

/// Lenslet test-sequence parameters (resolution, microlens diameter,
/// matching distance) keyed by e.g. "raytrix_r5_tunnel".
const std::vector<SequenceMeta>& sequence_presets();
std::optional<SequenceMeta> find_preset(std::string_view key);
std::string preset_key(const SequenceMeta& meta);

/// Reads the Y plane of one frame from a raw planar 8-bit file.
Frame read_yuv_luma(const std::filesystem::path& path, const SequenceMeta& meta, int frame_index);

struct SequenceInput {
  std::string path;
  SequenceMeta meta;
  int cur_frame = 1;
  int ref_frame = 0;
  friend bool operator==(const SequenceInput&, const SequenceInput&) = default;
};

struct ExperimentConfig {
  std::optional<SynthSpec> synth;
  std::optional<SequenceInput> sequence;
  SearchConfig search;
  std::vector<std::string> strategies;
  Mv pmv;
  int threads = 0;  // 0: PLENOME_THREADS or hardware concurrency
  std::string output;

  void validate() const;
};

bool operator==(const SynthSpec& a, const SynthSpec& b);
bool operator==(const SearchConfig& a, const SearchConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys and missing required fields raise ParseError naming the
/// offending field.
ExperimentConfig config_from_json(const nlohmann::json& j, bool check_files = true);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

nlohmann::json to_json(const EvalReport& report);
/// One row per strategy; columns listed in kReportCsvHeader.
std::string report_csv(const EvalReport& report);
inline constexpr std::string_view kReportCsvHeader =
    "strategy,blocks,asp,ape,hit_rate,cost_excess_mean,mean_wall_us,search_time_ratio_fs,"
    "search_time_ratio_tzs";
void write_report(const EvalReport& report, const std::filesystem::path& path);

/// One line per evaluated candidate: block id, stage, x, y, cost.
std::string trace_text(std::size_t block_id, const SearchResult& result);
void write_trace(const std::vector<BlockOutcome>& outcomes, const std::filesystem::path& path);

void write_frame_raw(const Frame& frame, const std::filesystem::path& path);
Frame read_frame_raw(const std::filesystem::path& path, int width, int height);

}  // namespace plenome
