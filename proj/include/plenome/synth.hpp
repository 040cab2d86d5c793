#pragma once

#include <cstdint>

#include "plenome/cost.hpp"
#include "plenome/geometry.hpp"

namespace plenome {

struct MotionSpec {
  long lattice_p = 0;  // microlens steps along the lens row
  long lattice_q = 0;  // row steps
  Mv deviation;        // extra integer-pel offset
};

enum class Texture { Procedural, Constant };

struct SynthSpec {
  int width = 256;
  int height = 256;
  double d = 23.30;
  Orientation orientation = Orientation::Horizontal;
  std::uint64_t texture_seed = 1;
  Texture texture = Texture::Procedural;
  bool vignette = false;
  MotionSpec motion;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 7;
  /// Matching pixel distance of the rendered content; <= 0 selects d/2.
  double matching_distance = 0.0;

  /// Throws SpecTooSmall / InvalidDiameter when the spec is unusable.
  void validate() const;
};

struct FramePair {
  Frame cur;
  Frame ref;
  Mv truth;  // cur(p) == ref(p + truth) when noise is off
};

/// Lattice shift plus deviation, with the lattice part rounded like the
/// MCP lattice.
Mv motion_offset(const SynthSpec& spec);

Frame render_reference(const SynthSpec& spec);

/// ref = rendered lenslet image; cur = ref translated by the motion, plus
/// clamped Gaussian noise. Throws ShiftExitsFrame if the motion exceeds
/// half the frame in either axis.
FramePair render_pair(const SynthSpec& spec);

}  // namespace plenome
