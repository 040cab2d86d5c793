#include "plenome/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "plenome/error.hpp"

namespace plenome {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::InvalidOptics: return "invalid-optics";
    case ErrorCategory::InvalidDiameter: return "invalid-diameter";
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::OutOfBoundsMv: return "out-of-bounds-mv";
    case ErrorCategory::EmptyFeasibleSet: return "empty-feasible-set";
    case ErrorCategory::SpecTooSmall: return "spec-too-small";
    case ErrorCategory::ShiftExitsFrame: return "shift-exits-frame";
    case ErrorCategory::SizeMismatch: return "size-mismatch";
    case ErrorCategory::IndexOutOfRange: return "index-out-of-range";
    case ErrorCategory::UnsupportedFormat: return "unsupported-format";
    case ErrorCategory::IoError: return "io-error";
    case ErrorCategory::ParseError: return "parse-error";
    case ErrorCategory::Usage: return "usage";
  }
  return "unknown";
}

std::string_view to_string(Orientation o) {
  return o == Orientation::Horizontal ? "horizontal" : "vertical";
}

std::string_view to_string(RingShape s) { return s == RingShape::Rhombus ? "rhombus" : "hexagon"; }

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Center: return "center";
    case Stage::McpLattice: return "mcp_lattice";
    case Stage::FastMcpH: return "fast_mcp_h";
    case Stage::FastMcpV: return "fast_mcp_v";
    case Stage::NeighborDiamond: return "neighbor_diamond";
    case Stage::Refinement: return "refinement";
    case Stage::Raster: return "raster";
  }
  return "unknown";
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  if (text == "h" || text == "horizontal") return Orientation::Horizontal;
  if (text == "v" || text == "vertical") return Orientation::Vertical;
  return std::nullopt;
}

std::optional<RingShape> parse_ring_shape(std::string_view text) {
  if (text == "rhombus") return RingShape::Rhombus;
  if (text == "hexagon") return RingShape::Hexagon;
  return std::nullopt;
}

int chebyshev(Mv a, Mv b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

int manhattan(Mv a, Mv b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

double derive_matching_distance(const OpticsParams& optics) {
  if (!(optics.a > 0.0) || !(optics.b > 0.0) || !(optics.d > 0.0)) {
    throw Error(ErrorCategory::InvalidOptics, "optics distances and diameter must be positive");
  }
  if (optics.mode == OpticsMode::Keplerian && optics.a < optics.b) {
    throw Error(ErrorCategory::InvalidOptics, "Keplerian mode requires a >= b");
  }
  if (optics.focal_length) {
    const double f = *optics.focal_length;
    const double lhs = 1.0 / optics.a + 1.0 / optics.b;
    if (!(f > 0.0) || std::abs(lhs * f - 1.0) > 1e-2) {
      throw Error(ErrorCategory::InvalidOptics, "focal length inconsistent with 1/a + 1/b = 1/f");
    }
  }
  const double ratio = optics.mode == OpticsMode::Keplerian ? (optics.a - optics.b) / optics.a
                                                             : (optics.a + optics.b) / optics.a;
  return ratio * optics.d;
}

// ---------------------------------------------------------------------------
// MlaGeometry
// ---------------------------------------------------------------------------

MlaGeometry::MlaGeometry(double d, Orientation orientation, bool negative_odd_offset)
    : d_(d), orientation_(orientation), negative_odd_offset_(negative_odd_offset) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCategory::InvalidDiameter, "microlens diameter must be positive");
  }
}

double MlaGeometry::row_pitch() const { return std::numbers::sqrt3 * d_ / 2.0; }

double MlaGeometry::w() const {
  return orientation_ == Orientation::Horizontal ? lens_pitch() : row_pitch();
}

double MlaGeometry::h() const {
  return orientation_ == Orientation::Horizontal ? row_pitch() : lens_pitch();
}

namespace {

bool is_odd(long q) { return (q % 2) != 0; }

// Offsets in row frame: u runs along lens rows, v across them.
double row_shift(const MlaGeometry& g, long q) {
  if (!is_odd(q)) return 0.0;
  return g.negative_odd_offset() ? -g.lens_pitch() / 2.0 : g.lens_pitch() / 2.0;
}

std::pair<double, double> to_image(const MlaGeometry& g, double u, double v) {
  return g.orientation() == Orientation::Horizontal ? std::pair{u, v} : std::pair{v, u};
}

std::pair<double, double> to_row_frame(const MlaGeometry& g, double x, double y) {
  return g.orientation() == Orientation::Horizontal ? std::pair{x, y} : std::pair{y, x};
}

Mv round_point(double x, double y) {
  return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

}  // namespace

std::pair<double, double> MlaGeometry::lattice_offset(long p, long q) const {
  const double u = static_cast<double>(p) * lens_pitch() + row_shift(*this, q);
  const double v = static_cast<double>(q) * row_pitch();
  return to_image(*this, u, v);
}

Mv MlaGeometry::lattice_point(long p, long q) const {
  const auto [x, y] = lattice_offset(p, q);
  return round_point(x, y);
}

std::pair<long, long> MlaGeometry::nearest_index(double x, double y) const {
  const auto [u, v] = to_row_frame(*this, x, y);
  const long q0 = static_cast<long>(std::floor(v / row_pitch()));
  double best = std::numeric_limits<double>::infinity();
  std::pair<long, long> best_index{0, 0};
  for (long q = q0 - 1; q <= q0 + 2; ++q) {
    const long p0 = std::lround((u - row_shift(*this, q)) / lens_pitch());
    for (long p = p0 - 1; p <= p0 + 1; ++p) {
      const double du = u - (static_cast<double>(p) * lens_pitch() + row_shift(*this, q));
      const double dv = v - static_cast<double>(q) * row_pitch();
      const double dist = du * du + dv * dv;
      if (dist < best) {
        best = dist;
        best_index = {p, q};
      }
    }
  }
  return best_index;
}

std::vector<Mv> MlaGeometry::lattice_points_near(Mv mv, int reach) const {
  const auto [p0, q0] = nearest_index(mv.x, mv.y);
  std::vector<Mv> points;
  for (long q = q0 - reach; q <= q0 + reach; ++q) {
    for (long p = p0 - reach; p <= p0 + reach; ++p) points.push_back(lattice_point(p, q));
  }
  return points;
}

MlaGeometry MlaGeometry::transposed() const {
  return MlaGeometry(d_,
                     orientation_ == Orientation::Horizontal ? Orientation::Vertical
                                                             : Orientation::Horizontal,
                     negative_odd_offset_);
}

// ---------------------------------------------------------------------------
// MCP lattice
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> mcp_lattice_unrounded(const MlaGeometry& geom, int W) {
  std::vector<std::pair<double, double>> points;
  const double limit = static_cast<double>(W);
  const long q_max = static_cast<long>(std::floor(limit / geom.row_pitch())) + 1;
  const long p_max = static_cast<long>(std::floor(limit / geom.lens_pitch())) + 2;
  for (long q = -q_max; q <= q_max; ++q) {
    if (std::abs(static_cast<double>(q) * geom.row_pitch()) > limit) continue;
    for (long p = -p_max; p <= p_max; ++p) {
      const double u = static_cast<double>(p) * geom.lens_pitch() + row_shift(geom, q);
      if (std::abs(u) > limit) continue;
      points.push_back(geom.lattice_offset(p, q));
    }
  }
  return points;
}

std::vector<Candidate> mcp_lattice(const MlaGeometry& geom, const SearchWindow& window) {
  std::set<Mv> seen;
  std::vector<Mv> offsets;
  for (const auto& [x, y] : mcp_lattice_unrounded(geom, window.half_width)) {
    const Mv mv = round_point(x, y);
    if (seen.insert(mv).second) offsets.push_back(mv);
  }
  std::sort(offsets.begin(), offsets.end(), [](Mv a, Mv b) {
    const int ca = chebyshev(a, {}), cb = chebyshev(b, {});
    if (ca != cb) return ca < cb;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  std::vector<Candidate> out;
  out.reserve(offsets.size());
  for (const Mv off : offsets) out.push_back({window.center + off, Stage::McpLattice});
  return out;
}

std::int64_t mcp_lattice_count(const MlaGeometry& geom, int W) {
  const double Wd = static_cast<double>(W);
  const double pitch = geom.lens_pitch();
  const auto m = static_cast<std::int64_t>(std::floor(Wd / geom.row_pitch()));
  const auto even_row = 2 * static_cast<std::int64_t>(std::floor(Wd / pitch)) + 1;
  const auto half_steps = static_cast<std::int64_t>(std::floor((Wd + pitch / 2.0) / pitch));
  if (m % 2 == 0) return (m + 1) * even_row + 2 * m * half_steps;
  return m * even_row + 2 * (m + 1) * half_steps;
}

// ---------------------------------------------------------------------------
// Fast MCP rings
// ---------------------------------------------------------------------------

std::vector<Mv> ring_offsets(const MlaGeometry& geom, int index, RingShape shape) {
  const double i = static_cast<double>(index);
  const double du = i * geom.lens_pitch();
  const double dv = i * geom.row_pitch();
  // Row-frame targets. Both shapes share the six nearest-neighbour axes
  // (+-u and the four half-pitch diagonals); the rhombus closes at the
  // second lattice row on the v axis, the hexagon at its flat edge.
  const double v_axis = shape == RingShape::Rhombus ? 2.0 * dv : dv;
  const std::pair<double, double> targets[8] = {
      {du, 0.0},        {du / 2.0, dv},  {0.0, v_axis},  {-du / 2.0, dv},
      {-du, 0.0},       {-du / 2.0, -dv}, {0.0, -v_axis}, {du / 2.0, -dv},
  };
  std::vector<Mv> ring;
  ring.reserve(8);
  for (const auto& [u, v] : targets) {
    const auto [x, y] = to_image(geom, u, v);
    const auto [p, q] = geom.nearest_index(x, y);
    const Mv mv = geom.lattice_point(p, q);
    if (std::find(ring.begin(), ring.end(), mv) == ring.end()) ring.push_back(mv);
  }
  const auto angle = [](Mv mv) {
    double a = std::atan2(static_cast<double>(mv.y), static_cast<double>(mv.x));
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  };
  std::stable_sort(ring.begin(), ring.end(), [&](Mv a, Mv b) { return angle(a) < angle(b); });
  return ring;
}

namespace {

Stage fast_stage(const MlaGeometry& geom) {
  return geom.orientation() == Orientation::Horizontal ? Stage::FastMcpH : Stage::FastMcpV;
}

void append_ring(const MlaGeometry& geom, const SearchWindow& window, int index, RingShape shape,
                 std::set<Mv>& seen, std::vector<Candidate>& out) {
  for (const Mv off : ring_offsets(geom, index, shape)) {
    if (chebyshev(off, {}) > window.half_width) continue;
    const Mv mv = window.center + off;
    if (seen.insert(mv).second) out.push_back({mv, fast_stage(geom)});
  }
}

int ring_count(double d, int W) { return static_cast<int>(std::floor(W / d)); }

}  // namespace

std::vector<Candidate> fast_mcp_rings(const MlaGeometry& geom, const SearchWindow& window,
                                      RingShape shape) {
  std::vector<Candidate> out;
  std::set<Mv> seen;
  const int rings = ring_count(geom.diameter(), window.half_width);
  for (int i = 1; i <= rings; ++i) append_ring(geom, window, i, shape, seen, out);
  return out;
}

std::vector<Candidate> fast_mcp_agnostic(double d, const SearchWindow& window, RingShape shape,
                                         bool negative_odd_offset) {
  const MlaGeometry horizontal(d, Orientation::Horizontal, negative_odd_offset);
  const MlaGeometry vertical = horizontal.transposed();
  std::vector<Candidate> out;
  std::set<Mv> seen;
  const int rings = ring_count(d, window.half_width);
  for (int i = 1; i <= rings; ++i) {
    append_ring(horizontal, window, i, shape, seen, out);
    append_ring(vertical, window, i, shape, seen, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diamonds and budgets
// ---------------------------------------------------------------------------

std::vector<Candidate> diamond_ring(Mv center, int distance, bool first_loop, Stage stage) {
  const int r = distance;
  if (first_loop) {
    return {{center + Mv{r, 0}, stage},
            {center + Mv{0, r}, stage},
            {center + Mv{-r, 0}, stage},
            {center + Mv{0, -r}, stage}};
  }
  const int half = static_cast<int>(std::lround(r / 2.0));
  return {{center + Mv{r, 0}, stage},       {center + Mv{half, half}, stage},
          {center + Mv{0, r}, stage},       {center + Mv{-half, half}, stage},
          {center + Mv{-r, 0}, stage},      {center + Mv{-half, -half}, stage},
          {center + Mv{0, -r}, stage},      {center + Mv{half, -half}, stage}};
}

int diamond_loop_count(double d) {
  if (!(d >= 2.0) || !std::isfinite(d)) {
    throw Error(ErrorCategory::InvalidDiameter,
                "microlens diameter must be at least 2, got " + std::to_string(d));
  }
  int n = 0;
  double span = 1.0;
  while (span * 2.0 <= d) {
    span *= 2.0;
    ++n;
  }
  return n;
}

int neighbor_count(double d) { return 4 + 8 * (diamond_loop_count(d) - 1); }

int refinement_count(double d) { return neighbor_count(d); }

std::int64_t fast_mcp_count(double d, int W) { return 8 * static_cast<std::int64_t>(ring_count(d, W)); }

std::int64_t total_budget(double d, int W, int K) {
  if (K < 1) throw Error(ErrorCategory::InvalidArgument, "K must be at least 1");
  return 2 * fast_mcp_count(d, W) + static_cast<std::int64_t>(K) * neighbor_count(d) +
         refinement_count(d);
}

}  // namespace plenome
