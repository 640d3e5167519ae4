#include "crowdcount/haar_features.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdcount {

namespace {

struct Rect {
  int x, y, w, h;
};

struct Layout {
  bool tilted;
  Rect total;
  Rect black;
};

Layout layout(const HaarFeature& f) {
  const auto [cw, ch] = prototype_cells(f.prototype);
  const int x = f.x, y = f.y, w = f.w, h = f.h;
  const Rect total{x, y, cw * w, ch * h};
  using P = HaarPrototype;
  switch (f.prototype) {
    case P::kEdgeH:
    case P::kEdgeV:
      return {false, total, {x, y, w, h}};
    case P::kEdgeTiltS:
    case P::kEdgeTiltD:
      return {true, total, {x, y, w, h}};
    case P::kLineH3: return {false, total, {x + w, y, w, h}};
    case P::kLineH4: return {false, total, {x + w, y, 2 * w, h}};
    case P::kLineV3: return {false, total, {x, y + h, w, h}};
    case P::kLineV4: return {false, total, {x, y + h, w, 2 * h}};
    // One cell along s moves the anchor by (+w, +w); along d by (-h, +h).
    case P::kLineTiltS3: return {true, total, {x + w, y + w, w, h}};
    case P::kLineTiltS4: return {true, total, {x + w, y + w, 2 * w, h}};
    case P::kLineTiltD3: return {true, total, {x - h, y + h, w, h}};
    case P::kLineTiltD4: return {true, total, {x - h, y + h, w, 2 * h}};
    case P::kCenterSurround: return {false, total, {x + w, y + h, w, h}};
    case P::kCenterSurroundTilt: return {true, total, {x + w - h, y + w + h, w, h}};
  }
  throw std::invalid_argument("unknown Haar prototype");
}

bool rect_fits(bool tilted, const Rect& r, int size) {
  if (r.w < 1 || r.h < 1) return false;
  if (!tilted) return r.x >= 0 && r.y >= 0 && r.x + r.w <= size && r.y + r.h <= size;
  return r.x - r.h + 1 >= 0 && r.x + r.w <= size && r.y >= 0 && r.y + r.w + r.h <= size;
}

std::int64_t rect_sum(bool tilted, const IntegralImage& ii, const Rect& r, int ox, int oy) {
  return tilted ? ii.tilted_sum(ox + r.x, oy + r.y, r.w, r.h) : ii.rect_sum(ox + r.x, oy + r.y, r.w, r.h);
}

}  // namespace

bool is_tilted(HaarPrototype p) {
  using P = HaarPrototype;
  switch (p) {
    case P::kEdgeTiltS:
    case P::kEdgeTiltD:
    case P::kLineTiltS3:
    case P::kLineTiltS4:
    case P::kLineTiltD3:
    case P::kLineTiltD4:
    case P::kCenterSurroundTilt:
      return true;
    default:
      return false;
  }
}

std::array<int, 2> prototype_cells(HaarPrototype p) {
  using P = HaarPrototype;
  switch (p) {
    case P::kEdgeH:
    case P::kEdgeTiltS: return {2, 1};
    case P::kEdgeV:
    case P::kEdgeTiltD: return {1, 2};
    case P::kLineH3:
    case P::kLineTiltS3: return {3, 1};
    case P::kLineH4:
    case P::kLineTiltS4: return {4, 1};
    case P::kLineV3:
    case P::kLineTiltD3: return {1, 3};
    case P::kLineV4:
    case P::kLineTiltD4: return {1, 4};
    case P::kCenterSurround:
    case P::kCenterSurroundTilt: return {3, 3};
  }
  throw std::invalid_argument("unknown Haar prototype");
}

bool fits_window(const HaarFeature& f, int size) {
  const int id = static_cast<int>(f.prototype);
  if (id < 1 || id > kHaarPrototypeCount) return false;
  const Layout l = layout(f);
  return rect_fits(l.tilted, l.total, size);
}

std::vector<HaarFeature> enumerate_features(int size, int stride) {
  if (size < 1 || stride < 1) throw std::invalid_argument("enumerate_features: size and stride must be >= 1");
  std::vector<HaarFeature> out;
  for (int id = 1; id <= kHaarPrototypeCount; ++id) {
    const auto p = static_cast<HaarPrototype>(id);
    for (int h = 1; h <= size; ++h) {
      for (int w = 1; w <= size; ++w) {
        for (int y = 0; y < size; y += stride) {
          for (int x = 0; x < size; x += stride) {
            const HaarFeature f{p, x, y, w, h};
            if (fits_window(f, size)) out.push_back(f);
          }
        }
      }
    }
  }
  return out;
}

HaarFeature scale_feature(const HaarFeature& f, int base, int size) {
  if (base < 1 || size < 1) throw std::invalid_argument("scale_feature: window sizes must be >= 1");
  if (size == base) return f;
  const double fac = static_cast<double>(size) / base;
  HaarFeature s = f;
  s.x = static_cast<int>(std::floor(f.x * fac));
  s.y = static_cast<int>(std::floor(f.y * fac));
  s.w = std::max(1, static_cast<int>(std::floor(f.w * fac)));
  s.h = std::max(1, static_cast<int>(std::floor(f.h * fac)));
  if (!is_tilted(f.prototype)) return s;

  const auto [cw, ch] = prototype_cells(f.prototype);
  for (int guard = 0; guard < 4 * size && !fits_window(s, size); ++guard) {
    const int wt = cw * s.w;
    const int ht = ch * s.h;
    if (s.x - ht + 1 < 0) {
      if (s.h > 1) --s.h; else ++s.x;
    } else if (s.x + wt > size) {
      if (s.w > 1) --s.w; else --s.x;
    } else if (s.y + wt + ht > size) {
      if (s.w >= s.h && s.w > 1) --s.w;
      else if (s.h > 1) --s.h;
      else --s.y;
    }
  }
  return s;
}

double eval_haar_at(const HaarFeature& f, const IntegralImage& ii, int ox, int oy) {
  const Layout l = layout(f);
  const double area_scale = l.tilted ? 2.0 : 1.0;
  const double total_area = area_scale * l.total.w * l.total.h;
  const double black_area = area_scale * l.black.w * l.black.h;
  const auto total = rect_sum(l.tilted, ii, l.total, ox, oy);
  const auto black = rect_sum(l.tilted, ii, l.black, ox, oy);
  return static_cast<double>(total - black) / (total_area - black_area) - static_cast<double>(black) / black_area;
}

double eval_haar(const HaarFeature& f, const IntegralImage& ii, const Window& window, int base) {
  const HaarFeature s = scale_feature(f, base, window.size);
  if (!fits_window(s, window.size)) throw std::invalid_argument("eval_haar: feature exceeds the window");
  return eval_haar_at(s, ii, window.x, window.y);
}

}  // namespace crowdcount
