#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "crowdcount/image.hpp"

namespace crowdcount {

struct BackgroundModel {
  GrayFrame mean;
  double tolerance = 0.0;
};

// 3x3 structuring element, origin at the centre cell.
class StructuringElement {
 public:
  // Full 3x3 (all ones).
  StructuringElement();
  explicit StructuringElement(const std::array<std::array<bool, 3>, 3>& cells);

  bool at(int dx, int dy) const { return cells_[dy + 1][dx + 1]; }

 private:
  std::array<std::array<bool, 3>, 3> cells_;
};

struct Blob {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  std::size_t area = 0;

  bool contains(int px, int py) const { return px >= x && py >= y && px < x + w && py < y + h; }
  friend bool operator==(const Blob&, const Blob&) = default;
};

struct MotionConfig {
  double diff_threshold = 10.0;
  int hysteresis_low = 64;
  int hysteresis_high = 128;
  std::size_t min_area = 50;
};

// Pixel-wise rounded mean of the frames.
BackgroundModel build_background(std::span<const GrayFrame> frames, double tolerance);

// Set iff |current - background| > tolerance AND |current - previous| > diff_threshold.
BinaryMask segment_motion(const GrayFrame& current, const GrayFrame& previous,
                          const BackgroundModel& model, double diff_threshold);

// The 5x5 integer approximation of a sigma = 1 Gaussian (sum 273).
inline constexpr std::array<std::array<int, 5>, 5> kGaussian5x5 = {{
    {1, 4, 7, 4, 1},
    {4, 16, 26, 16, 4},
    {7, 26, 41, 26, 7},
    {4, 16, 26, 16, 4},
    {1, 4, 7, 4, 1},
}};
inline constexpr int kGaussian5x5Sum = 273;

// Convolution with kGaussian5x5, edge-replicated borders, rounded to nearest.
GrayFrame gaussian_blur(const GrayFrame& frame);

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
// Dilation followed by erosion.
BinaryMask morphological_close(const BinaryMask& mask, const StructuringElement& se = {});

// Seeds are pixels >= high; pixels >= low survive when 8-connected to a seed.
BinaryMask hysteresis_threshold(const GrayFrame& frame, int low, int high);

// 8-connected components with area >= min_area, sorted by box origin (y, x).
std::vector<Blob> extract_blobs(const BinaryMask& mask, std::size_t min_area);

struct MotionResult {
  BinaryMask mask;
  std::vector<Blob> blobs;
};

// Full chain: segment_motion -> blur -> hysteresis -> close -> blobs.
MotionResult detect_motion_regions(const GrayFrame& current, const GrayFrame& previous,
                                   const BackgroundModel& model, const MotionConfig& cfg);

// Background persisted as <path>.pgm plus a sidecar <path>.txt holding `tolerance=<int>`.
void save_background(const std::filesystem::path& pgm_path, const BackgroundModel& model);
BackgroundModel load_background(const std::filesystem::path& pgm_path);

}  // namespace crowdcount
