#include "crowdcount/motion_segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <string>

#include "crowdcount/error.hpp"
#include "crowdcount/key_value.hpp"

namespace crowdcount {

StructuringElement::StructuringElement() {
  for (auto& row : cells_) row.fill(true);
}

StructuringElement::StructuringElement(const std::array<std::array<bool, 3>, 3>& cells) : cells_(cells) {
  if (!cells_[1][1]) throw std::invalid_argument("structuring element origin must be set");
}

BackgroundModel build_background(std::span<const GrayFrame> frames, double tolerance) {
  if (frames.empty()) throw std::invalid_argument("build_background: no frames");
  if (tolerance < 0) throw std::invalid_argument("build_background: negative tolerance");
  const GrayFrame& first = frames.front();
  std::vector<std::uint32_t> sums(first.size(), 0);
  for (const auto& f : frames) {
    if (!f.same_shape(first)) throw std::invalid_argument("build_background: dimension mismatch");
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) sums[i] += px[i];
  }
  const auto n = static_cast<std::uint32_t>(frames.size());
  std::vector<std::uint8_t> mean(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    // round half up
    mean[i] = static_cast<std::uint8_t>((2 * sums[i] + n) / (2 * n));
  }
  return {GrayFrame(first.width(), first.height(), std::move(mean)), tolerance};
}

BinaryMask segment_motion(const GrayFrame& current, const GrayFrame& previous,
                          const BackgroundModel& model, double diff_threshold) {
  if (!current.same_shape(previous) || !current.same_shape(model.mean)) {
    throw std::invalid_argument("segment_motion: dimension mismatch");
  }
  BinaryMask out(current.width(), current.height());
  const auto cur = current.pixels();
  const auto prev = previous.pixels();
  const auto bg = model.mean.pixels();
  for (int y = 0; y < current.height(); ++y) {
    for (int x = 0; x < current.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * current.width() + x;
      const int c = cur[i];
      const bool foreground = std::abs(c - bg[i]) > model.tolerance;
      const bool moving = std::abs(c - prev[i]) > diff_threshold;
      if (foreground && moving) out.set(x, y);
    }
  }
  return out;
}

GrayFrame gaussian_blur(const GrayFrame& frame) {
  if (frame.empty()) throw std::invalid_argument("gaussian_blur: empty frame");
  GrayFrame out(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      int acc = 0;
      for (int ky = -2; ky <= 2; ++ky) {
        for (int kx = -2; kx <= 2; ++kx) {
          acc += kGaussian5x5[ky + 2][kx + 2] * frame.clamped(x + kx, y + ky);
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>((2 * acc + kGaussian5x5Sum) / (2 * kGaussian5x5Sum));
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool hit = false;
      for (int dy = -1; dy <= 1 && !hit; ++dy) {
        for (int dx = -1; dx <= 1 && !hit; ++dx) {
          // reflected element
          hit = se.at(dx, dy) && mask.get(x - dx, y - dy);
        }
      }
      if (hit) out.set(x, y);
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool fits = true;
      for (int dy = -1; dy <= 1 && fits; ++dy) {
        for (int dx = -1; dx <= 1 && fits; ++dx) {
          if (se.at(dx, dy) && !mask.get(x + dx, y + dy)) fits = false;
        }
      }
      if (fits) out.set(x, y);
    }
  }
  return out;
}

BinaryMask morphological_close(const BinaryMask& mask, const StructuringElement& se) {
  return erode(dilate(mask, se), se);
}

BinaryMask hysteresis_threshold(const GrayFrame& frame, int low, int high) {
  if (low < 0 || low > high) throw std::invalid_argument("hysteresis_threshold: require 0 <= low <= high");
  const int w = frame.width();
  const int h = frame.height();
  BinaryMask out(w, h);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (frame.at(x, y) >= high) {
        out.set(x, y);
        queue.emplace_back(x, y);
      }
    }
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (out.get(nx, ny) || frame.at(nx, ny) < low) continue;
        out.set(nx, ny);
        queue.emplace_back(nx, ny);
      }
    }
  }
  return out;
}

std::vector<Blob> extract_blobs(const BinaryMask& mask, std::size_t min_area) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  std::vector<Blob> blobs;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (visited[idx] || !mask.get(x, y)) continue;
      visited[idx] = 1;
      stack.assign(1, {x, y});
      int x0 = x, x1 = x, y0 = y, y1 = y;
      std::size_t area = 0;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        x0 = std::min(x0, cx);
        x1 = std::max(x1, cx);
        y0 = std::min(y0, cy);
        y1 = std::max(y1, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (!mask.get(nx, ny)) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (visited[nidx]) continue;
            visited[nidx] = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      if (area >= min_area) blobs.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1, area});
    }
  }
  std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return blobs;
}

MotionResult detect_motion_regions(const GrayFrame& current, const GrayFrame& previous,
                                   const BackgroundModel& model, const MotionConfig& cfg) {
  const BinaryMask raw = segment_motion(current, previous, model, cfg.diff_threshold);
  const GrayFrame smooth = gaussian_blur(raw.to_frame());
  const BinaryMask strong = hysteresis_threshold(smooth, cfg.hysteresis_low, cfg.hysteresis_high);
  BinaryMask closed = morphological_close(strong);
  auto blobs = extract_blobs(closed, cfg.min_area);
  return {std::move(closed), std::move(blobs)};
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p.replace_extension(".txt");
  return p;
}

}  // namespace

void save_background(const std::filesystem::path& pgm_path, const BackgroundModel& model) {
  write_pgm(pgm_path, model.mean);
  std::ofstream out(sidecar_path(pgm_path));
  if (!out) throw DataError("cannot write " + sidecar_path(pgm_path).string());
  out << "tolerance=" << std::lround(model.tolerance) << "\n";
}

BackgroundModel load_background(const std::filesystem::path& pgm_path) {
  BackgroundModel model;
  model.mean = read_pgm(pgm_path);
  const auto kv = KeyValueFile::load(sidecar_path(pgm_path));
  model.tolerance = static_cast<double>(parse_long(kv.require("", "tolerance"), "tolerance"));
  if (model.tolerance < 0) throw DataError("background tolerance must be >= 0");
  return model;
}

}  // namespace crowdcount
