#include "crowdcount/corner_detection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace crowdcount {

void CornerConfig::validate() const {
  if (!(th_d > 0.0 && th_d < 1.0)) throw std::invalid_argument("th_d must lie in (0, 1)");
  if (th_g < 0.0) throw std::invalid_argument("th_g must be >= 0");
  if (mask_size != 3 && mask_size != 5 && mask_size != 7) {
    throw std::invalid_argument("mask_size must be 3, 5 or 7");
  }
}

GradientField sobel_gradients(const GrayFrame& frame) {
  if (frame.width() < 3 || frame.height() < 3) {
    throw std::invalid_argument("sobel_gradients: frame must be at least 3x3");
  }
  GradientField g;
  g.width = frame.width();
  g.height = frame.height();
  const std::size_t n = frame.size();
  g.gx.resize(n);
  g.gy.resize(n);
  g.magnitude.resize(n);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const int p00 = frame.clamped(x - 1, y - 1), p10 = frame.clamped(x, y - 1), p20 = frame.clamped(x + 1, y - 1);
      const int p01 = frame.clamped(x - 1, y), p21 = frame.clamped(x + 1, y);
      const int p02 = frame.clamped(x - 1, y + 1), p12 = frame.clamped(x, y + 1), p22 = frame.clamped(x + 1, y + 1);
      const double gx = (p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02);
      const double gy = (p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20);
      const std::size_t i = g.index(x, y);
      g.gx[i] = gx;
      g.gy[i] = gy;
      g.magnitude[i] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

StructureTensorField structure_tensor(const GradientField& grads) {
  StructureTensorField t;
  t.width = grads.width;
  t.height = grads.height;
  const std::size_t n = static_cast<std::size_t>(t.width) * t.height;
  t.a.assign(n, 0.0);
  t.b.assign(n, 0.0);
  t.c.assign(n, 0.0);
  for (int y = 0; y < t.height; ++y) {
    for (int x = 0; x < t.width; ++x) {
      double a = 0, b = 0, c = 0;
      for (int ky = -2; ky <= 2; ++ky) {
        const int sy = std::clamp(y + ky, 0, t.height - 1);
        for (int kx = -2; kx <= 2; ++kx) {
          const int sx = std::clamp(x + kx, 0, t.width - 1);
          const std::size_t j = grads.index(sx, sy);
          const double w = kGaussian5x5[ky + 2][kx + 2];
          a += w * grads.gx[j] * grads.gx[j];
          b += w * grads.gx[j] * grads.gy[j];
          c += w * grads.gy[j] * grads.gy[j];
        }
      }
      const std::size_t i = t.index(x, y);
      t.a[i] = a / kGaussian5x5Sum;
      t.b[i] = b / kGaussian5x5Sum;
      t.c[i] = c / kGaussian5x5Sum;
    }
  }
  return t;
}

std::pair<double, double> symmetric_eigenvalues(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double half_diff = 0.5 * (a - c);
  const double radius = std::hypot(half_diff, b);
  double lmax = mean + radius;
  // lambda_min via the determinant avoids cancellation when radius ~ mean.
  double lmin = lmax > 0.0 ? (a * c - b * b) / lmax : mean - radius;
  lmin = std::max(lmin, mean - radius);
  return {lmin, lmax};
}

ScoreMap corner_discriminant(const StructureTensorField& tensor) {
  ScoreMap d;
  d.width = tensor.width;
  d.height = tensor.height;
  d.values.resize(tensor.a.size());
  for (std::size_t i = 0; i < tensor.a.size(); ++i) {
    const auto [lmin, lmax] = symmetric_eigenvalues(tensor.a[i], tensor.b[i], tensor.c[i]);
    d.values[i] = lmax <= kFlatEigenvalue ? 0.0 : std::clamp(lmin / lmax, 0.0, 1.0);
  }
  return d;
}

std::vector<CornerPoint> select_corners(const ScoreMap& scores, const GradientField& grads,
                                        std::span<const Blob> blobs, const CornerConfig& cfg,
                                        int view_id) {
  cfg.validate();
  const int w = scores.width;
  const int h = scores.height;
  std::vector<std::uint8_t> in_blob(static_cast<std::size_t>(w) * h, 0);
  for (const Blob& b : blobs) {
    for (int y = std::max(b.y, 0); y < std::min(b.y + b.h, h); ++y) {
      for (int x = std::max(b.x, 0); x < std::min(b.x + b.w, w); ++x) {
        in_blob[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }

  std::vector<CornerPoint> candidates;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!in_blob[i]) continue;
      const double d = scores.values[i];
      if (!(d > cfg.th_d) || !(grads.magnitude[i] > cfg.th_g)) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1 && is_max; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (!(grads.magnitude[grads.index(nx, ny)] > 0.0)) continue;
          if (scores.at(nx, ny) >= d) is_max = false;
        }
      }
      if (is_max) candidates.push_back({x, y, d, view_id});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const CornerPoint& p, const CornerPoint& q) {
    if (p.score != q.score) return p.score > q.score;
    return p.y != q.y ? p.y < q.y : p.x < q.x;
  });

  const int r = cfg.mask_size / 2;
  std::vector<std::uint8_t> suppressed(static_cast<std::size_t>(w) * h, 0);
  std::vector<CornerPoint> kept;
  for (const CornerPoint& cand : candidates) {
    if (suppressed[static_cast<std::size_t>(cand.y) * w + cand.x]) continue;
    kept.push_back(cand);
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (cfg.mask_shape == MaskShape::kCircular && dx * dx + dy * dy > r * r) continue;
        const int nx = cand.x + dx;
        const int ny = cand.y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        suppressed[static_cast<std::size_t>(ny) * w + nx] = 1;
      }
    }
  }
  return kept;
}

std::vector<CornerPoint> detect_corners(const GrayFrame& frame, std::span<const Blob> blobs,
                                        const CornerConfig& cfg, int view_id) {
  cfg.validate();
  if (blobs.empty()) return {};
  const GradientField grads = sobel_gradients(frame);
  const ScoreMap scores = corner_discriminant(structure_tensor(grads));
  return select_corners(scores, grads, blobs, cfg, view_id);
}

void write_corners_csv(std::ostream& out, int frame_index, std::span<const CornerPoint> corners) {
  for (const auto& c : corners) {
    out << frame_index << ',' << c.view_id << ',' << c.x << ',' << c.y << ',' << c.score << '\n';
  }
}

}  // namespace crowdcount
