#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code paths being checked.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct IntBox {
  int x0, y0, x1, y1;
};

// IoU by counting unit pixels [x, x+1) x [y, y+1) covered by each box.
inline double pixel_iou(const IntBox& a, const IntBox& b) {
  const int lo_x = std::min(a.x0, b.x0), hi_x = std::max(a.x1, b.x1);
  const int lo_y = std::min(a.y0, b.y0), hi_y = std::max(a.y1, b.y1);
  long inter = 0, uni = 0;
  for (int y = lo_y; y < hi_y; ++y) {
    for (int x = lo_x; x < hi_x; ++x) {
      const bool in_a = x >= a.x0 && x < a.x1 && y >= a.y0 && y < a.y1;
      const bool in_b = x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean of a rectangular pixel block of a single-channel row-major image.
inline double block_mean(const std::vector<float>& img, int width, int x0, int y0, int x1, int y1) {
  double sum = 0.0;
  int n = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      sum += img[static_cast<std::size_t>(y) * width + x];
      ++n;
    }
  }
  return sum / n;
}

// Number of stride-sized cells along one axis touched by [lo, hi).
inline int touched_cells(double lo, double hi, int stride, int limit) {
  int n = 0;
  for (int i = 0; i < limit; ++i) {
    const double c0 = static_cast<double>(i) * stride, c1 = c0 + stride;
    if (std::min(hi, c1) - std::max(lo, c0) > 0.0) ++n;
  }
  return n;
}

// Binomial 3-sigma band check for a count.
inline bool within_3_sigma(double observed, double trials, double p) {
  const double mean = trials * p;
  const double sigma = std::sqrt(trials * p * (1.0 - p));
  return std::abs(observed - mean) <= 3.0 * sigma;
}

}  // namespace oracle
