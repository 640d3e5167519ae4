#include "crowdcount/integral_image.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdcount {

IntegralImage::IntegralImage(const GrayFrame& frame) : width_(frame.width()), height_(frame.height()) {
  const int w1 = width_ + 1;
  sum_.assign(static_cast<std::size_t>(w1) * (height_ + 1), 0);
  sq_sum_.assign(sum_.size(), 0);
  for (int y = 0; y < height_; ++y) {
    std::int64_t row = 0;
    std::int64_t row_sq = 0;
    for (int x = 0; x < width_; ++x) {
      const std::int64_t v = frame.at(x, y);
      row += v;
      row_sq += v * v;
      const std::size_t idx = static_cast<std::size_t>(y + 1) * w1 + (x + 1);
      sum_[idx] = sum_[idx - w1] + row;
      sq_sum_[idx] = sq_sum_[idx - w1] + row_sq;
    }
  }

  // Wedge table for apex columns a in [-(H+1), W+H+1]; beyond that range the
  // wedges miss the frame entirely and read as zero.
  wedge_offset_ = height_ + 1;
  wedge_cols_ = width_ + 2 * height_ + 3;
  wedge_.assign(static_cast<std::size_t>(wedge_cols_) * (height_ + 1), 0);
  auto pixel = [&](int a, int j) -> std::int64_t {
    if (a < 0 || a >= width_ || j < 0 || j >= height_) return 0;
    return frame.at(a, j);
  };
  auto cell = [&](int a, int b) -> std::int64_t {
    if (b <= 0) return 0;
    const int col = a + wedge_offset_;
    if (col < 0 || col >= wedge_cols_) return 0;
    return wedge_[static_cast<std::size_t>(b) * wedge_cols_ + col];
  };
  for (int b = 1; b <= height_; ++b) {
    for (int col = 0; col < wedge_cols_; ++col) {
      const int a = col - wedge_offset_;
      wedge_[static_cast<std::size_t>(b) * wedge_cols_ + col] =
          cell(a - 1, b - 1) + cell(a + 1, b - 1) - cell(a, b - 2) + pixel(a, b - 1) + pixel(a, b - 2);
    }
  }
}

std::int64_t IntegralImage::rect_sum(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
    throw std::out_of_range("rect_sum: rectangle outside the image");
  }
  return at(x + w, y + h) - at(x, y + h) - at(x + w, y) + at(x, y);
}

std::int64_t IntegralImage::rect_sq_sum(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
    throw std::out_of_range("rect_sq_sum: rectangle outside the image");
  }
  const int w1 = width_ + 1;
  auto sq = [&](int cx, int cy) { return sq_sum_[static_cast<std::size_t>(cy) * w1 + cx]; };
  return sq(x + w, y + h) - sq(x, y + h) - sq(x + w, y) + sq(x, y);
}

std::int64_t IntegralImage::wedge(int a, int b) const {
  if (b <= 0) return 0;
  const int col = a + wedge_offset_;
  if (col < 0 || col >= wedge_cols_) return 0;
  return wedge_[static_cast<std::size_t>(b) * wedge_cols_ + col];
}

std::int64_t IntegralImage::tilted_sum(int x, int y, int w, int h) const {
  if (w < 0 || h < 0 || x - h + 1 < 0 || x + w - 1 > width_ - 1 || y < 0 || y + w + h > height_) {
    throw std::out_of_range("tilted_sum: rectangle outside the image");
  }
  // wedge over {s <= S, d <= D} has apex a = (S - D) / 2, b = (S + D) / 2 + 1.
  auto wedge_sd = [&](int s, int d) { return wedge((s - d) / 2, (s + d) / 2 + 1); };
  const int s0 = x + y - 1;
  const int d0 = y - x - 1;
  const int s1 = s0 + 2 * w;
  const int d1 = d0 + 2 * h;
  return wedge_sd(s1, d1) - wedge_sd(s0, d1) - wedge_sd(s1, d0) + wedge_sd(s0, d0);
}

double IntegralImage::window_stddev(int x, int y, int size) const {
  const double n = static_cast<double>(size) * size;
  const double mean = static_cast<double>(rect_sum(x, y, size, size)) / n;
  const double var = static_cast<double>(rect_sq_sum(x, y, size, size)) / n - mean * mean;
  return var > 0 ? std::sqrt(var) : 0.0;
}

}  // namespace crowdcount
