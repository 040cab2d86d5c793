#include "plenome/cost.hpp"

#include <cstdlib>
#include <string>

#include "plenome/error.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace plenome {

Frame::Frame(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      luma_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCategory::InvalidArgument, "frame dimensions must be positive");
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> luma)
    : width_(width), height_(height), luma_(std::move(luma)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCategory::InvalidArgument, "frame dimensions must be positive");
  }
  if (luma_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCategory::SizeMismatch, "luma length does not match width*height");
  }
}

Frame Frame::transposed() const {
  Frame out(height_, width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(x, y);
  }
  return out;
}

std::string_view to_string(CostMetric m) { return m == CostMetric::Sad ? "sad" : "ssd"; }

std::optional<CostMetric> parse_cost_metric(std::string_view text) {
  if (text == "sad") return CostMetric::Sad;
  if (text == "ssd") return CostMetric::Ssd;
  return std::nullopt;
}

bool displaced_inside(const Frame& ref, const BlockRect& block, Mv mv) {
  const BlockRect moved{block.x0 + mv.x, block.y0 + mv.y, block.bw, block.bh};
  return moved.inside(ref.width(), ref.height());
}

namespace {

void check_bounds(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  if (cur.width() != ref.width() || cur.height() != ref.height()) {
    throw Error(ErrorCategory::SizeMismatch, "current and reference frames differ in size");
  }
  if (!block.inside(cur.width(), cur.height())) {
    throw Error(ErrorCategory::OutOfBoundsMv, "block lies outside the current frame");
  }
  if (!displaced_inside(ref, block, mv)) {
    throw Error(ErrorCategory::OutOfBoundsMv,
                "displaced block exits the reference frame at mv (" + std::to_string(mv.x) + "," +
                    std::to_string(mv.y) + ")");
  }
}

std::uint64_t sad_rows_scalar(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  std::uint64_t total = 0;
  for (int y = 0; y < block.bh; ++y) {
    const std::uint8_t* a = cur.row(block.y0 + y) + block.x0;
    const std::uint8_t* b = ref.row(block.y0 + y + mv.y) + block.x0 + mv.x;
    for (int x = 0; x < block.bw; ++x) total += static_cast<std::uint64_t>(std::abs(a[x] - b[x]));
  }
  return total;
}

#if defined(__SSE2__)
std::uint64_t sad_rows_sse2(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  __m128i acc = _mm_setzero_si128();
  std::uint64_t tail = 0;
  const int wide = block.bw & ~15;
  const int narrow = (block.bw - wide) & ~7;
  for (int y = 0; y < block.bh; ++y) {
    const std::uint8_t* a = cur.row(block.y0 + y) + block.x0;
    const std::uint8_t* b = ref.row(block.y0 + y + mv.y) + block.x0 + mv.x;
    int x = 0;
    for (; x < wide; x += 16) {
      const __m128i va = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + x));
      const __m128i vb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + x));
      acc = _mm_add_epi64(acc, _mm_sad_epu8(va, vb));
    }
    if (narrow) {
      const __m128i va = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(a + x));
      const __m128i vb = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(b + x));
      acc = _mm_add_epi64(acc, _mm_sad_epu8(va, vb));
      x += 8;
    }
    for (; x < block.bw; ++x) tail += static_cast<std::uint64_t>(std::abs(a[x] - b[x]));
  }
  alignas(16) std::uint64_t lanes[2];
  _mm_store_si128(reinterpret_cast<__m128i*>(lanes), acc);
  return lanes[0] + lanes[1] + tail;
}
#endif

}  // namespace

std::uint64_t sad_scalar(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  check_bounds(cur, ref, block, mv);
  return sad_rows_scalar(cur, ref, block, mv);
}

std::uint64_t sad(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  check_bounds(cur, ref, block, mv);
#if defined(__SSE2__)
  return sad_rows_sse2(cur, ref, block, mv);
#else
  return sad_rows_scalar(cur, ref, block, mv);
#endif
}

std::uint64_t ssd(const Frame& cur, const Frame& ref, const BlockRect& block, Mv mv) {
  check_bounds(cur, ref, block, mv);
  std::uint64_t total = 0;
  for (int y = 0; y < block.bh; ++y) {
    const std::uint8_t* a = cur.row(block.y0 + y) + block.x0;
    const std::uint8_t* b = ref.row(block.y0 + y + mv.y) + block.x0 + mv.x;
    for (int x = 0; x < block.bw; ++x) {
      const int diff = a[x] - b[x];
      total += static_cast<std::uint64_t>(diff * diff);
    }
  }
  return total;
}

std::uint64_t block_cost(CostMetric metric, const Frame& cur, const Frame& ref,
                         const BlockRect& block, Mv mv) {
  return metric == CostMetric::Sad ? sad(cur, ref, block, mv) : ssd(cur, ref, block, mv);
}

}  // namespace plenome
