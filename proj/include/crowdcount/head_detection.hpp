#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "crowdcount/adaboost.hpp"
#include "crowdcount/haar_features.hpp"
#include "crowdcount/image.hpp"
#include "crowdcount/integral_image.hpp"
#include "crowdcount/motion_segmentation.hpp"
#include "crowdcount/raw_pixel_classifier.hpp"

namespace crowdcount {

struct DetectionBox {
  double cx = 0;
  double cy = 0;
  double size = kBaseWindow;
  double confidence = 1;
  int view_id = 0;
};

// One frame prepared for window classification.
struct ScanFrame {
  const GrayFrame& frame;
  const IntegralImage& integral;
};

// Returns a confidence for an accepted window, nullopt for a rejection.
class WindowClassifier {
 public:
  virtual ~WindowClassifier() = default;
  virtual std::optional<double> classify(const ScanFrame& scan, const Window& window) const = 0;
};

class CascadeWindowClassifier : public WindowClassifier {
 public:
  CascadeWindowClassifier(const Cascade& cascade, int min_size = 9, int max_size = 25);
  std::optional<double> classify(const ScanFrame& scan, const Window& window) const override;

 private:
  Cascade cascade_;
  int min_size_;
  std::vector<ScaledCascade> scaled_;
};

class RawPixelWindowClassifier : public WindowClassifier {
 public:
  explicit RawPixelWindowClassifier(std::shared_ptr<const BinaryClassifier> classifier);
  std::optional<double> classify(const ScanFrame& scan, const Window& window) const override;

 private:
  std::shared_ptr<const BinaryClassifier> classifier_;
};

struct ScanConfig {
  int min_size = 9;
  int max_size = 25;
  int size_step = 2;  // odd sizes keep the window centred on a pixel
  int step = 1;
};

// Classifies every window whose centre pixel lies inside a blob's bounding
// box and is fully inside the frame, then merges the accepted ones.
std::vector<DetectionBox> sliding_window_detect(const GrayFrame& frame, std::span<const Blob> blobs,
                                                const WindowClassifier& classifier, const ScanConfig& cfg = {},
                                                int view_id = 0);

// Single-link clustering: boxes join when their centres are within half the
// larger window size. Each cluster becomes its confidence-weighted mean
// centre, mean size and maximum confidence. Output is sorted by (cy, cx).
std::vector<DetectionBox> merge_nearby(std::span<const DetectionBox> boxes);

}  // namespace crowdcount
