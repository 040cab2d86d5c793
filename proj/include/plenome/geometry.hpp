#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace plenome {

enum class Orientation { Horizontal, Vertical };
enum class OpticsMode { Keplerian, Galilean };
enum class RingShape { Rhombus, Hexagon };

/// Which search stage produced a candidate.
enum class Stage {
  Center,
  McpLattice,
  FastMcpH,
  FastMcpV,
  NeighborDiamond,
  Refinement,
  Raster,
};

std::string_view to_string(Orientation o);
std::string_view to_string(RingShape s);
std::string_view to_string(Stage s);
std::optional<Orientation> parse_orientation(std::string_view text);
std::optional<RingShape> parse_ring_shape(std::string_view text);

/// Integer-pel displacement. Adding it to current-block coordinates
/// indexes the reference frame.
struct Mv {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Mv&, const Mv&) = default;
  friend Mv operator+(Mv a, Mv b) { return {a.x + b.x, a.y + b.y}; }
  friend Mv operator-(Mv a, Mv b) { return {a.x - b.x, a.y - b.y}; }
  Mv transposed() const { return {y, x}; }
};

int chebyshev(Mv a, Mv b);
int manhattan(Mv a, Mv b);

struct Candidate {
  Mv mv;
  Stage stage = Stage::Center;
};

struct SearchWindow {
  int half_width = 1;
  Mv center;

  bool contains(Mv mv) const { return chebyshev(mv, center) <= half_width; }
};

struct OpticsParams {
  double a = 0.0;  // MLA to main-lens image plane
  double b = 0.0;  // MLA to sensor, same unit as a
  OpticsMode mode = OpticsMode::Keplerian;
  double d = 0.0;  // microlens diameter in pixels
  std::optional<double> focal_length;
};

/// Matching pixel distance s between responses of one object point under
/// adjacent microlenses. Throws InvalidOptics on inconsistent parameters.
double derive_matching_distance(const OpticsParams& optics);

/// Hexagonally packed microlens array.
///
/// Lens rows run along the orientation axis: for Horizontal, lenses in one
/// row are `d` apart along x and rows are `sqrt(3)*d/2` apart along y, with
/// odd rows shifted by half a pitch. Vertical is the transpose.
class MlaGeometry {
 public:
  MlaGeometry(double d, Orientation orientation, bool negative_odd_offset = false);

  double diameter() const { return d_; }
  Orientation orientation() const { return orientation_; }
  bool negative_odd_offset() const { return negative_odd_offset_; }

  /// Pitch between lenses of one row (= d).
  double lens_pitch() const { return d_; }
  /// Spacing between adjacent rows (= sqrt(3)*d/2).
  double row_pitch() const;

  /// Lattice pitch along the image x axis.
  double w() const;
  /// Lattice pitch along the image y axis.
  double h() const;

  /// Unrounded image-space offset of lattice index (p, q).
  std::pair<double, double> lattice_offset(long p, long q) const;
  /// Lattice index (p, q) rounded to the nearest integer pixel.
  Mv lattice_point(long p, long q) const;

  /// Nearest lattice index to an arbitrary real image-space point.
  /// Ties resolve to the lower (q, p).
  std::pair<long, long> nearest_index(double x, double y) const;
  /// Rounded lattice points whose indices lie within `reach` steps of the
  /// index nearest to `mv`.
  std::vector<Mv> lattice_points_near(Mv mv, int reach = 2) const;

  MlaGeometry transposed() const;

 private:
  double d_;
  Orientation orientation_;
  bool negative_odd_offset_;
};

/// Unrounded lattice offsets inside a square window of half-width W
/// around the origin, in enumeration order (row q ascending, p ascending).
std::vector<std::pair<double, double>> mcp_lattice_unrounded(const MlaGeometry& geom, int W);

/// All MCP candidates in the window, rounded, deduplicated, ordered by
/// Chebyshev distance from the window center (ties in raster order).
std::vector<Candidate> mcp_lattice(const MlaGeometry& geom, const SearchWindow& window);

/// Closed-form count of MCP lattice points inside a window.
std::int64_t mcp_lattice_count(const MlaGeometry& geom, int W);

/// Ring offsets (relative to the origin) of ring `index` >= 1, snapped to
/// the lattice and ordered counter-clockwise starting from +x. Not clipped.
std::vector<Mv> ring_offsets(const MlaGeometry& geom, int index, RingShape shape);

/// Center-to-boundary rings of the fast MCP pattern: floor(W/d) rings of up
/// to eight lattice points each, clipped to the window.
std::vector<Candidate> fast_mcp_rings(const MlaGeometry& geom, const SearchWindow& window,
                                      RingShape shape);

/// Fast pattern for both MLA orientations, interleaved ring by ring
/// (H1, V1, H2, V2, ...), first occurrence kept.
std::vector<Candidate> fast_mcp_agnostic(double d, const SearchWindow& window, RingShape shape,
                                         bool negative_odd_offset = false);

/// Small (4-point, `first_loop`) or large (8-point) diamond around center.
std::vector<Candidate> diamond_ring(Mv center, int distance, bool first_loop,
                                    Stage stage = Stage::NeighborDiamond);

/// Number of diamond loops floor(log2 d). Throws InvalidDiameter if d < 2.
int diamond_loop_count(double d);
/// Points of one neighbors-MCP search: 4 + 8*(N-1).
int neighbor_count(double d);
/// Points of one refinement pass; same pattern as neighbor_count.
int refinement_count(double d);
/// Best-case candidate budget 2*(8*floor(W/d)) + K*neighbors + refinement.
std::int64_t total_budget(double d, int W, int K);
/// Fast MCP candidates for one orientation: 8*floor(W/d).
std::int64_t fast_mcp_count(double d, int W);

}  // namespace plenome
