#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "crowdcount/image.hpp"
#include "crowdcount/motion_segmentation.hpp"

namespace crowdcount {

// Per-pixel Sobel derivatives; magnitude = sqrt(gx^2 + gy^2).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// Gaussian-windowed second-moment matrix [a b; b c] at every pixel.
struct StructureTensorField {
  int width = 0;
  int height = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct CornerPoint {
  int x = 0;
  int y = 0;
  double score = 0.0;
  int view_id = 0;

  friend bool operator==(const CornerPoint&, const CornerPoint&) = default;
};

enum class MaskShape { kSquare, kCircular };

struct CornerConfig {
  double th_d = 0.1;
  double th_g = 20.0;
  MaskShape mask_shape = MaskShape::kSquare;
  int mask_size = 5;

  // Throws std::invalid_argument when th_d is outside (0,1), th_g < 0 or
  // mask_size is not one of 3, 5, 7.
  void validate() const;
};

// Below this lambda_max a pixel is treated as flat and scores 0.
inline constexpr double kFlatEigenvalue = 1e-12;

GradientField sobel_gradients(const GrayFrame& frame);
StructureTensorField structure_tensor(const GradientField& grads);

// Closed-form eigenvalues of a symmetric 2x2 matrix, (min, max).
std::pair<double, double> symmetric_eigenvalues(double a, double b, double c);

// D = lambda_min / lambda_max per pixel, 0 where lambda_max <= kFlatEigenvalue.
ScoreMap corner_discriminant(const StructureTensorField& tensor);

// Candidates lie inside blob boxes with D > th_d and gradient magnitude >
// th_g, and are strict maxima of D among their 8 neighbours with nonzero
// gradient (D peaks on flat pixels just inside a corner, where the gradient
// vanishes). They are then greedily suppressed in descending D (ties by
// (y, x)) with the configured mask.
std::vector<CornerPoint> detect_corners(const GrayFrame& frame, std::span<const Blob> blobs,
                                        const CornerConfig& cfg, int view_id = 0);

// Same selection, starting from precomputed maps. Exposed for testing.
std::vector<CornerPoint> select_corners(const ScoreMap& scores, const GradientField& grads,
                                        std::span<const Blob> blobs, const CornerConfig& cfg,
                                        int view_id = 0);

// `frame,view,x,y,score` rows (no header).
void write_corners_csv(std::ostream& out, int frame_index, std::span<const CornerPoint> corners);

}  // namespace crowdcount
