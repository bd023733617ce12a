#include "slv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace slv {

std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << '(' << b.x_min << ", " << b.y_min << ", " << b.x_max << ", "
            << b.y_max << ')';
}

double area(const Box& b) {
  return std::max(0.0, b.width()) * std::max(0.0, b.height());
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box clip(const Box& b, const ImageDims& dims) {
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  Box out{std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h),
          std::clamp(b.x_max, 0.0, w), std::clamp(b.y_max, 0.0, h)};
  return out;
}

bool inside(const Box& b, const ImageDims& dims) {
  return b.valid() && b.x_min >= 0.0 && b.y_min >= 0.0 &&
         b.x_max <= static_cast<double>(dims.width) &&
         b.y_max <= static_cast<double>(dims.height);
}

Box translate(const Box& b, double dx, double dy) {
  return {b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
}

namespace {

std::size_t snap(double v, std::size_t limit) {
  const double r = std::nearbyint(v);
  if (!(r > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(r), limit);
}

}  // namespace

PixelSpan pixel_span(const Box& b, const ImageDims& dims) {
  PixelSpan s{snap(b.x_min, dims.width), snap(b.x_max, dims.width),
              snap(b.y_min, dims.height), snap(b.y_max, dims.height)};
  if (s.col_end < s.col_begin) s.col_end = s.col_begin;
  if (s.row_end < s.row_begin) s.row_end = s.row_begin;
  return s;
}

}  // namespace slv
