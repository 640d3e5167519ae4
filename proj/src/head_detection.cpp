#include "crowdcount/head_detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crowdcount {

CascadeWindowClassifier::CascadeWindowClassifier(const Cascade& cascade, int min_size, int max_size)
    : cascade_(cascade), min_size_(min_size) {
  if (min_size < 1 || max_size < min_size) throw std::invalid_argument("cascade classifier: bad size range");
  for (int s = min_size; s <= max_size; ++s) scaled_.emplace_back(cascade_, s);
}

std::optional<double> CascadeWindowClassifier::classify(const ScanFrame& scan, const Window& window) const {
  const int idx = window.size - min_size_;
  const bool in_range = idx >= 0 && idx < static_cast<int>(scaled_.size());
  const bool ok = in_range ? scaled_[idx].accepts(scan.integral, window.x, window.y)
                           : classify_window_cascade(cascade_, scan.integral, window);
  return ok ? std::optional<double>(1.0) : std::nullopt;
}

RawPixelWindowClassifier::RawPixelWindowClassifier(std::shared_ptr<const BinaryClassifier> classifier)
    : classifier_(std::move(classifier)) {
  if (!classifier_) throw std::invalid_argument("raw-pixel classifier is null");
}

std::optional<double> RawPixelWindowClassifier::classify(const ScanFrame& scan, const Window& window) const {
  const double d = classifier_->decision(extract_raw_features(scan.frame, window));
  return d > 0 ? std::optional<double>(d) : std::nullopt;
}

std::vector<DetectionBox> sliding_window_detect(const GrayFrame& frame, std::span<const Blob> blobs,
                                                const WindowClassifier& classifier, const ScanConfig& cfg,
                                                int view_id) {
  if (cfg.min_size < 1 || cfg.max_size < cfg.min_size || cfg.size_step < 1 || cfg.step < 1) {
    throw std::invalid_argument("sliding_window_detect: bad scan configuration");
  }
  if (blobs.empty()) return {};
  BinaryMask centres(frame.width(), frame.height());
  for (const auto& b : blobs) {
    for (int y = std::max(0, b.y); y < std::min(frame.height(), b.y + b.h); y += cfg.step) {
      for (int x = std::max(0, b.x); x < std::min(frame.width(), b.x + b.w); x += cfg.step) centres.set(x, y);
    }
  }
  const IntegralImage ii(frame);
  const ScanFrame scan{frame, ii};
  std::vector<DetectionBox> hits;
  for (int size = cfg.min_size; size <= cfg.max_size; size += cfg.size_step) {
    const int half = size / 2;
    for (int cy = half; cy + (size - half) <= frame.height(); ++cy) {
      for (int cx = half; cx + (size - half) <= frame.width(); ++cx) {
        if (!centres.get(cx, cy)) continue;
        const Window w{cx - half, cy - half, size};
        if (const auto conf = classifier.classify(scan, w)) {
          hits.push_back({static_cast<double>(cx), static_cast<double>(cy), static_cast<double>(size), *conf,
                          view_id});
        }
      }
    }
  }
  return merge_nearby(hits);
}

std::vector<DetectionBox> merge_nearby(std::span<const DetectionBox> boxes) {
  const std::size_t n = boxes.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double range = 0.5 * std::max(boxes[i].size, boxes[j].size);
      if (std::hypot(boxes[i].cx - boxes[j].cx, boxes[i].cy - boxes[j].cy) <= range) {
        parent[find(i)] = find(j);
      }
    }
  }

  struct Acc {
    double wx = 0, wy = 0, wsum = 0, x = 0, y = 0, size = 0, conf = -1e300;
    int count = 0, view = 0;
  };
  std::vector<Acc> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = acc[find(i)];
    const auto& b = boxes[i];
    const double w = std::max(b.confidence, 0.0);
    a.wx += w * b.cx;
    a.wy += w * b.cy;
    a.wsum += w;
    a.x += b.cx;
    a.y += b.cy;
    a.size += b.size;
    a.conf = std::max(a.conf, b.confidence);
    a.view = b.view_id;
    ++a.count;
  }
  std::vector<DetectionBox> out;
  for (const auto& a : acc) {
    if (a.count == 0) continue;
    DetectionBox d;
    if (a.wsum > 0) {
      d.cx = a.wx / a.wsum;
      d.cy = a.wy / a.wsum;
    } else {
      d.cx = a.x / a.count;
      d.cy = a.y / a.count;
    }
    d.size = a.size / a.count;
    d.confidence = a.conf;
    d.view_id = a.view;
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const DetectionBox& a, const DetectionBox& b) {
    return a.cy != b.cy ? a.cy < b.cy : a.cx < b.cx;
  });
  return out;
}

}  // namespace crowdcount
