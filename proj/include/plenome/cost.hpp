#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "plenome/geometry.hpp"

namespace plenome {

/// Single 8-bit luma plane, row-major.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, std::uint8_t fill = 0);
  Frame(int width, int height, std::vector<std::uint8_t> luma);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> luma() const { return luma_; }
  std::span<std::uint8_t> luma() { return luma_; }

  std::uint8_t at(int x, int y) const { return luma_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return luma_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::uint8_t* row(int y) const { return luma_.data() + static_cast<std::size_t>(y) * width_; }

  Frame transposed() const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> luma_;
};

struct BlockRect {
  int x0 = 0;
  int y0 = 0;
  int bw = 16;
  int bh = 16;

  bool inside(int width, int height) const {
    return x0 >= 0 && y0 >= 0 && bw > 0 && bh > 0 && x0 + bw <= width && y0 + bh <= height;
  }
  BlockRect transposed() const { return {y0, x0, bh, bw}; }
};

enum class CostMetric { Sad, Ssd };

std::string_view to_string(CostMetric m);
std::optional<CostMetric> parse_cost_metric(std::string_view text);

/// True when the block displaced by mv lies fully inside the frame.
bool displaced_inside(const Frame& ref, const BlockRect& block, Mv mv);

/// Sum of absolute differences between the current block and the reference
/// block displaced by mv. Throws OutOfBoundsMv if the displaced block leaves
/// the reference frame.
std::uint64_t sad(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv);

/// Plain loop; the golden reference for the vectorized path.
std::uint64_t sad_scalar(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv);

std::uint64_t ssd(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv);

std::uint64_t block_cost(CostMetric metric, const Frame& cur, const Frame& ref,
                         const BlockRect& block, Mv mv);

}  // namespace plenome
