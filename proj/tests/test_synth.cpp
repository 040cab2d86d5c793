#include <doctest.h>

#include <algorithm>
#include <set>

#include "plenome/search.hpp"
#include "plenome/synth.hpp"
#include "test_util.hpp"

using namespace plenome;

namespace {

// Mean-removed autocorrelation of the central region at a given shift.
double autocorrelation(const Frame& f, Mv shift) {
  const int margin = 24;
  double mean = 0.0;
  int n = 0;
  for (int y = margin; y < f.height() - margin; ++y) {
    for (int x = margin; x < f.width() - margin; ++x) {
      mean += f.at(x, y);
      ++n;
    }
  }
  mean /= n;
  double acc = 0.0;
  for (int y = margin; y < f.height() - margin; ++y) {
    for (int x = margin; x < f.width() - margin; ++x) {
      acc += (f.at(x, y) - mean) * (f.at(x + shift.x, y + shift.y) - mean);
    }
  }
  return acc / n;
}

}  // namespace

TEST_CASE("rendering is deterministic") {
  SynthSpec spec;
  spec.texture_seed = 9;
  spec.noise_sigma = 3.0;
  spec.motion = MotionSpec{1, 1, Mv{2, 2}};
  const FramePair a = render_pair(spec);
  const FramePair b = render_pair(spec);
  CHECK(a.cur == b.cur);
  CHECK(a.ref == b.ref);
  CHECK(render_reference(spec) == a.ref);
  spec.texture_seed = 10;
  CHECK_FALSE(render_reference(spec) == a.ref);
}

TEST_CASE("lattice motion maps to pixel offsets") {
  SynthSpec spec;
  spec.d = 23.0;
  spec.motion = MotionSpec{1, 0, Mv{}};
  CHECK(motion_offset(spec) == Mv{23, 0});
  // Row step: x = w/2 = 11.5 rounds to 12, y = 19.92 rounds to 20.
  spec.motion = MotionSpec{0, 1, Mv{3, -2}};
  CHECK(motion_offset(spec) == Mv{15, 18});
  spec.orientation = Orientation::Vertical;
  CHECK(motion_offset(spec) == Mv{20 + 3, 12 - 2});
}

TEST_CASE("ground truth is the full-search optimum") {
  SynthSpec spec;
  spec.d = 23.0;
  spec.motion = MotionSpec{0, 1, Mv{3, -2}};
  const FramePair pair = render_pair(spec);
  REQUIRE(pair.truth == Mv{15, 18});
  SearchConfig cfg;
  cfg.window = 24;
  const auto r = full_search(pair.cur, pair.ref, BlockRect{120, 120, 16, 16}, Mv{}, cfg);
  CHECK(r.best_mv == pair.truth);
  CHECK(r.best_cost == 0);
}

TEST_CASE("zero motion gives identical frames") {
  SynthSpec spec;
  const FramePair pair = render_pair(spec);
  CHECK(pair.truth == Mv{0, 0});
  CHECK(pair.cur == pair.ref);
}

TEST_CASE("autocorrelation peaks at the lattice offsets") {
  SynthSpec spec;
  spec.d = 16.0;
  spec.texture = Texture::Constant;
  const Frame f = render_reference(spec);
  std::vector<std::pair<double, Mv>> scores;
  for (int y = -20; y <= 20; ++y) {
    for (int x = -20; x <= 20; ++x) {
      if (std::max(std::abs(x), std::abs(y)) < 4) continue;
      scores.push_back({autocorrelation(f, Mv{x, y}), Mv{x, y}});
    }
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::set<Mv> top;
  for (int i = 0; i < 6; ++i) top.insert(scores[i].second);
  const std::set<Mv> lattice{{16, 0}, {-16, 0}, {8, 14}, {-8, 14}, {8, -14}, {-8, -14}};
  CHECK(top == lattice);
}

TEST_CASE("constant texture gives constant discs") {
  SynthSpec spec;
  spec.texture = Texture::Constant;
  const Frame f = render_reference(spec);
  std::set<int> values(f.luma().begin(), f.luma().end());
  CHECK(values.size() == 2);
}

TEST_CASE("vignette darkens disc edges") {
  SynthSpec spec;
  spec.texture = Texture::Constant;
  const Frame flat = render_reference(spec);
  spec.vignette = true;
  const Frame shaded = render_reference(spec);
  CHECK_FALSE(flat == shaded);
  for (std::size_t i = 0; i < flat.luma().size(); ++i) CHECK(shaded.luma()[i] <= flat.luma()[i]);
}

TEST_CASE("noise only touches the current frame") {
  SynthSpec spec;
  spec.motion = MotionSpec{1, 0, Mv{}};
  const FramePair clean = render_pair(spec);
  spec.noise_sigma = 4.0;
  const FramePair noisy = render_pair(spec);
  CHECK(noisy.ref == clean.ref);
  CHECK_FALSE(noisy.cur == clean.cur);
  spec.noise_seed = 8;
  CHECK_FALSE(render_pair(spec).cur == noisy.cur);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.width = 80;
  CHECK(category_of([&] { render_reference(spec); }) == ErrorCategory::SpecTooSmall);
  spec = SynthSpec{};
  spec.d = 1.0;
  CHECK(category_of([&] { render_reference(spec); }) == ErrorCategory::InvalidDiameter);
  spec = SynthSpec{};
  spec.motion = MotionSpec{6, 0, Mv{}};
  CHECK(category_of([&] { render_pair(spec); }) == ErrorCategory::ShiftExitsFrame);
  spec = SynthSpec{};
  spec.noise_sigma = -1.0;
  CHECK(category_of([&] { render_pair(spec); }) == ErrorCategory::InvalidArgument);
}
