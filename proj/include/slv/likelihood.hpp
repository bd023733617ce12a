#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "slv/geometry.hpp"

namespace slv {

/// H x W field of non-negative scores, stored row-major.
class LikelihoodMap {
 public:
  LikelihoodMap() = default;
  explicit LikelihoodMap(ImageDims dims, double fill = 0.0);
  LikelihoodMap(ImageDims dims, std::vector<double> values);

  const ImageDims& dims() const { return dims_; }
  std::size_t width() const { return dims_.width; }
  std::size_t height() const { return dims_.height; }
  std::size_t size() const { return values_.size(); }

  double& at(std::size_t row, std::size_t col) {
    return values_[row * dims_.width + col];
  }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * dims_.width + col];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max() const;
  double sum() const;

  friend bool operator==(const LikelihoodMap&, const LikelihoodMap&) = default;

 private:
  ImageDims dims_{};
  std::vector<double> values_;
};

/// Proposals of one class that survived score filtering.
struct ScoredProposals {
  std::vector<Box> boxes;
  std::vector<double> scores;
  int class_id = 0;
};

/// h x w x d backbone activations; element (i, j, k) at (i * w + j) * d + k.
class FeatureMap {
 public:
  FeatureMap(std::size_t height, std::size_t width, std::size_t depth,
             std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t depth() const { return depth_; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * width_ + j) * depth_ + k];
  }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t height_;
  std::size_t width_;
  std::size_t depth_;
  std::vector<double> values_;
};

/// Sum of the scores of every proposal covering each pixel.
///
/// Corners are scattered into a difference array held in 128-bit fixed point
/// (2^-64 resolution), which is then prefix-summed row-major and column-major.
/// Integer prefix sums are exact, so uncovered pixels come out as exactly 0
/// and each covered pixel is a single rounding of the true sum.
LikelihoodMap accumulate(const ScoredProposals& proposals, const ImageDims& dims);

/// Divides by the maximum. An all-zero map is returned unchanged.
LikelihoodMap scale_unit(const LikelihoodMap& m);

inline constexpr double kNoSearch = std::numeric_limits<double>::infinity();

/// Mean of the strictly positive elements, or kNoSearch for an all-zero map.
double search_threshold(const LikelihoodMap& m);

/// Per-pixel mean over the depth axis.
LikelihoodMap channel_average(const FeatureMap& f);

/// Area-average (box filter) resampling to `target`.
LikelihoodMap resize_area(const LikelihoodMap& m, const ImageDims& target);

/// Mean of the maps of the positive classes, resized to `target`. `maps` holds
/// one entry per class (negative-class entries are ignored and may be empty).
LikelihoodMap merge_maps(std::span<const LikelihoodMap> maps,
                         std::span<const int> labels, const ImageDims& target);

}  // namespace slv
