#pragma once

#include <array>
#include <vector>

#include "crowdcount/integral_image.hpp"

namespace crowdcount {

// The fourteen rectangle prototypes.
//   1-4   edge: two cells (upright horizontal, upright vertical, tilted along
//         s, tilted along d); the first cell is black.
//   5-12  line: three or four cells in a row, the middle one or two black
//         (upright horizontal 3/4, upright vertical 3/4, then tilted).
//   13-14 centre-surround 3x3 cells, centre black (upright, tilted).
enum class HaarPrototype : int {
  kEdgeH = 1,
  kEdgeV,
  kEdgeTiltS,
  kEdgeTiltD,
  kLineH3,
  kLineH4,
  kLineV3,
  kLineV4,
  kLineTiltS3,
  kLineTiltS4,
  kLineTiltD3,
  kLineTiltD4,
  kCenterSurround,
  kCenterSurroundTilt,
};

inline constexpr int kHaarPrototypeCount = 14;
inline constexpr int kBaseWindow = 9;

bool is_tilted(HaarPrototype p);

// x, y: anchor within the window (top-left for upright, top pixel for
// tilted); w, h: size of one cell.
struct HaarFeature {
  HaarPrototype prototype = HaarPrototype::kEdgeH;
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  friend bool operator==(const HaarFeature&, const HaarFeature&) = default;
};

// Cell multiples (columns, rows) of the full feature extent.
std::array<int, 2> prototype_cells(HaarPrototype p);

// Whether the feature lies inside a size x size window.
bool fits_window(const HaarFeature& f, int size);

// Every feature of every prototype that fits a size x size window, with
// anchors on a `stride` grid.
std::vector<HaarFeature> enumerate_features(int size = kBaseWindow, int stride = 1);

// Rescales a base-window feature to a window of `size` pixels. Anchor and
// cell sizes are floored, then shrunk until the feature fits.
HaarFeature scale_feature(const HaarFeature& f, int base, int size);

// mean(white) - mean(black) with the feature placed at window origin (ox, oy).
// Throws std::out_of_range when the feature leaves the image.
double eval_haar_at(const HaarFeature& f, const IntegralImage& ii, int ox, int oy);

struct Window {
  int x = 0;
  int y = 0;
  int size = kBaseWindow;
};

// Scales a base-window feature to `window.size` and evaluates it there.
// Throws std::invalid_argument when the scaled feature does not fit.
double eval_haar(const HaarFeature& f, const IntegralImage& ii, const Window& window,
                 int base = kBaseWindow);

}  // namespace crowdcount
