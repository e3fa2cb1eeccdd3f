#pragma once

#include <array>
#include <iosfwd>
#include <string_view>

namespace hodet {

// Axis-aligned rectangle in continuous pixel coordinates, origin top-left.
// Construction enforces x0 < x1, y0 < y1 and finite coordinates.
class Box {
 public:
  Box(double x0, double y0, double x1, double y1);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x1() const { return x1_; }
  double y1() const { return y1_; }

  double width() const { return x1_ - x0_; }
  double height() const { return y1_ - y0_; }
  double area() const { return width() * height(); }
  double shorter_side() const;

  bool contains(const Box& other) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x0_, y0_, x1_, y1_;
};

std::ostream& operator<<(std::ostream& os, const Box& b);

// Area of a ∩ b, zero when the boxes do not overlap.
double intersection_area(const Box& a, const Box& b);

double iou(const Box& a, const Box& b);

enum class HierarchyScheme { NonOverlapped, Overlapped };

std::string_view to_string(HierarchyScheme scheme);
// Accepts "overlapped" and "non-overlapped" (also "nonoverlapped",
// "non_overlapped"). Throws ConfigError otherwise.
HierarchyScheme parse_scheme(std::string_view name);

inline constexpr int kNumChildren = 5;

// The five child regions in the fixed order
// [top-left, top-right, bottom-left, bottom-right, center].
// The index into this array is the movement action index.
//
// NonOverlapped: the 2x2 quarters plus a half-size box centred in the parent.
// Overlapped: four 3/4-size boxes flush with the parent's corners plus a
// 3/4-size box centred in the parent.
std::array<Box, kNumChildren> children(const Box& parent, HierarchyScheme scheme);

// Per-descent area ratio: 1/4 for NonOverlapped, 9/16 for Overlapped.
double child_area_ratio(HierarchyScheme scheme);

}  // namespace hodet
