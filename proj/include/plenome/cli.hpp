#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plenome/io.hpp"

namespace plenome {

struct LoadedFrames {
  Frame cur;
  Frame ref;
  std::optional<Mv> truth;
};

LoadedFrames load_frames(const ExperimentConfig& cfg);

/// Worker count: explicit value if > 0, else PLENOME_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

/// Per-block records for every strategy with full search as the oracle.
std::vector<EvalRecord> run_comparison(const Frame& cur, const Frame& ref,
                                       const std::vector<BlockRect>& blocks, Mv pmv,
                                       const SearchConfig& search,
                                       const std::vector<std::string>& strategies, int threads);

/// Entry point shared by the executable and the tests. Returns the process
/// exit code; errors go to `err` as "error[<category>]: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace plenome
