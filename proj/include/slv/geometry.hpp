#pragma once

#include <cstddef>
#include <iosfwd>

namespace slv {

/// Axis-aligned rectangle in continuous image coordinates. The origin is the
/// top-left corner, x grows rightward and y downward. Raster pixel (i, j)
/// occupies the unit square [j, j+1) x [i, i+1).
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }

  friend bool operator==(const Box&, const Box&) = default;
};

std::ostream& operator<<(std::ostream& os, const Box& b);

struct ImageDims {
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t pixels() const { return width * height; }
  bool valid() const { return width >= 1 && height >= 1; }

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Half-open integer pixel span of a box after snapping to the nearest grid
/// line: columns [col_begin, col_end), rows [row_begin, row_end).
struct PixelSpan {
  std::size_t col_begin = 0;
  std::size_t col_end = 0;
  std::size_t row_begin = 0;
  std::size_t row_end = 0;

  std::size_t count() const {
    return (col_end - col_begin) * (row_end - row_begin);
  }
  bool empty() const { return col_begin >= col_end || row_begin >= row_end; }
};

double area(const Box& b);

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b);

Box clip(const Box& b, const ImageDims& dims);

bool inside(const Box& b, const ImageDims& dims);

Box translate(const Box& b, double dx, double dy);

/// Pixels covered by `b` under the round-to-nearest-grid convention, limited
/// to the image.
PixelSpan pixel_span(const Box& b, const ImageDims& dims);

}  // namespace slv
