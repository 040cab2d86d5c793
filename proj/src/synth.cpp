#include "plenome/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "plenome/error.hpp"

namespace plenome {

void SynthSpec::validate() const {
  if (!(d >= 2.0) || !std::isfinite(d)) {
    throw Error(ErrorCategory::InvalidDiameter, "synthetic microlens diameter must be >= 2");
  }
  if (width < 4.0 * d || height < 4.0 * d) {
    throw Error(ErrorCategory::SpecTooSmall, "frame must be at least 4d in each dimension");
  }
  if (noise_sigma < 0.0) throw Error(ErrorCategory::InvalidArgument, "noise_sigma must be >= 0");
}

Mv motion_offset(const SynthSpec& spec) {
  const MlaGeometry geom(spec.d, spec.orientation);
  return geom.lattice_point(spec.motion.lattice_p, spec.motion.lattice_q) + spec.motion.deviation;
}

namespace {

constexpr double kGapLevel = 80.0;
constexpr double kFill = 0.94;  // disc radius as a fraction of d/2

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(ix) * 0x632be59bd9b4e019ULL ^
                                          mix(static_cast<std::uint64_t>(iy))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Smoothly interpolated value noise in [0, 1).
double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  const double tx = smooth(x - fx), ty = smooth(y - fy);
  const double v00 = lattice_value(seed, ix, iy), v10 = lattice_value(seed, ix + 1, iy);
  const double v01 = lattice_value(seed, ix, iy + 1), v11 = lattice_value(seed, ix + 1, iy + 1);
  const double top = v00 + (v10 - v00) * tx;
  const double bottom = v01 + (v11 - v01) * tx;
  return top + (bottom - top) * ty;
}

class LensletRenderer {
 public:
  explicit LensletRenderer(const SynthSpec& spec)
      : spec_(spec), geom_(spec.d, spec.orientation), radius_(kFill * spec.d / 2.0) {
    const double s = spec.matching_distance > 0.0 ? spec.matching_distance : spec.d / 2.0;
    // Micro-image magnification giving neighbour content shifted by s.
    // s > d corresponds to inverted micro-images.
    const double gap = spec.d - s;
    if (std::abs(gap) < 1e-6) {
      magnification_ = 64.0;
    } else {
      magnification_ = spec.d / gap;
    }
  }

  double sample(double x, double y) const {
    const auto [p, q] = geom_.nearest_index(x, y);
    const auto [cx, cy] = geom_.lattice_offset(p, q);
    const double dx = x - cx, dy = y - cy;
    const double r2 = dx * dx + dy * dy;
    if (r2 > radius_ * radius_) return kGapLevel;

    double value = 160.0;
    if (spec_.texture == Texture::Procedural) {
      value = scene(cx + dx * magnification_, cy + dy * magnification_);
    }
    if (spec_.vignette) {
      const double t = 1.0 - r2 / (radius_ * radius_);
      value = kGapLevel + (value - kGapLevel) * t;
    }
    return value;
  }

 private:
  // Periods are chosen in sensor pixels and scaled into scene units by the
  // micro-image magnification.
  double scene(double sx, double sy) const {
    const double d = spec_.d;
    const double k = std::abs(magnification_);
    const std::uint64_t seed = spec_.texture_seed;
    const auto octave = [&](std::uint64_t salt, double period) {
      const double scale = period * k;
      return value_noise(seed + salt, sx / scale, sy / scale);
    };
    const double v = 0.45 * octave(0, 2.0 * d) + 0.35 * octave(1, d) + 0.20 * octave(2, 12.0);
    return 24.0 + 208.0 * v;
  }

  const SynthSpec& spec_;
  MlaGeometry geom_;
  double radius_;
  double magnification_ = 2.0;
};

std::uint8_t to_luma(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Frame render_shifted(const SynthSpec& spec, Mv shift) {
  const LensletRenderer renderer(spec);
  Frame frame(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      frame.at(x, y) = to_luma(renderer.sample(x + shift.x, y + shift.y));
    }
  }
  return frame;
}

}  // namespace

Frame render_reference(const SynthSpec& spec) {
  spec.validate();
  return render_shifted(spec, Mv{});
}

FramePair render_pair(const SynthSpec& spec) {
  spec.validate();
  const Mv truth = motion_offset(spec);
  if (2 * std::abs(truth.x) > spec.width || 2 * std::abs(truth.y) > spec.height) {
    throw Error(ErrorCategory::ShiftExitsFrame,
                "motion (" + std::to_string(truth.x) + "," + std::to_string(truth.y) +
                    ") exceeds half the frame");
  }
  FramePair pair{render_shifted(spec, truth), render_shifted(spec, Mv{}), truth};
  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.noise_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto& px : pair.cur.luma()) px = to_luma(px + noise(rng));
  }
  return pair;
}

}  // namespace plenome
