#pragma once

#include <cstdint>
#include <vector>

#include "crowdcount/image.hpp"

namespace crowdcount {

// Summed-area tables over a frame: upright sums, squared sums (for window
// variance), and 45-degree "wedge" sums for tilted rectangles.
//
// Tilted rectangles use (s, d) = (x + y, y - x) coordinates. A tilted
// rectangle anchored at its top pixel (x, y) with extents (w, h) covers the
// 2wh pixels with s in (x+y-1, x+y-1+2w] and d in (y-x-1, y-x-1+2h]; its
// bounding box spans columns [x-h+1, x+w-1] and rows [y, y+w+h-1].
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const GrayFrame& frame);

  int width() const { return width_; }
  int height() const { return height_; }

  // Cumulative table entry ii(x, y) = sum of pixels with col < x, row < y.
  std::int64_t at(int x, int y) const { return sum_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }

  std::int64_t rect_sum(int x, int y, int w, int h) const;
  std::int64_t rect_sq_sum(int x, int y, int w, int h) const;
  std::int64_t tilted_sum(int x, int y, int w, int h) const;

  // Population standard deviation of a square window.
  double window_stddev(int x, int y, int size) const;

 private:
  // Sum of pixels (i, j) with j < b and |i - a| <= b - 1 - j.
  std::int64_t wedge(int a, int b) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> sum_;
  std::vector<std::int64_t> sq_sum_;
  int wedge_offset_ = 0;
  int wedge_cols_ = 0;
  std::vector<std::int64_t> wedge_;
};

}  // namespace crowdcount
