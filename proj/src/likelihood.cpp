#include "slv/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slv/errors.hpp"

namespace slv {

LikelihoodMap::LikelihoodMap(ImageDims dims, double fill)
    : dims_(dims), values_(dims.pixels(), fill) {}

LikelihoodMap::LikelihoodMap(ImageDims dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  require(values_.size() == dims_.pixels(),
          "LikelihoodMap: value count does not match dims");
}

double LikelihoodMap::max() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

double LikelihoodMap::sum() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t depth,
                       std::vector<double> values)
    : height_(height), width_(width), depth_(depth), values_(std::move(values)) {
  require(height_ >= 1 && width_ >= 1 && depth_ >= 1,
          "FeatureMap: dimensions must be positive");
  require(values_.size() == height_ * width_ * depth_,
          "FeatureMap: value count does not match h*w*d");
}

namespace {

__extension__ using Fixed = __int128;

// 2^64: scores are in [0, 1] in practice, so this leaves 63 bits of headroom
// for the sum over thousands of proposals.
constexpr int kFixedShift = 64;

Fixed to_fixed(double v) {
  return static_cast<Fixed>(std::nearbyint(std::ldexp(v, kFixedShift)));
}

double from_fixed(Fixed v) {
  return std::ldexp(static_cast<double>(v), -kFixedShift);
}

}  // namespace

LikelihoodMap accumulate(const ScoredProposals& proposals, const ImageDims& dims) {
  require(proposals.boxes.size() == proposals.scores.size(),
          "accumulate: boxes and scores differ in length");
  require(dims.valid(), "accumulate: image dims must be positive");

  const std::size_t w = dims.width;
  const std::size_t h = dims.height;
  const std::size_t stride = w + 1;
  std::vector<Fixed> diff((h + 1) * stride, 0);

  for (std::size_t r = 0; r < proposals.boxes.size(); ++r) {
    const PixelSpan s = pixel_span(proposals.boxes[r], dims);
    if (s.empty()) continue;
    const Fixed q = to_fixed(proposals.scores[r]);
    diff[s.row_begin * stride + s.col_begin] += q;
    diff[s.row_begin * stride + s.col_end] -= q;
    diff[s.row_end * stride + s.col_begin] -= q;
    diff[s.row_end * stride + s.col_end] += q;
  }

  for (std::size_t i = 0; i < h; ++i) {
    Fixed* row = diff.data() + i * stride;
    for (std::size_t j = 1; j < w; ++j) row[j] += row[j - 1];
  }
  for (std::size_t i = 1; i < h; ++i) {
    Fixed* row = diff.data() + i * stride;
    const Fixed* above = row - stride;
    for (std::size_t j = 0; j < w; ++j) row[j] += above[j];
  }

  std::vector<double> out(dims.pixels());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      out[i * w + j] = from_fixed(diff[i * stride + j]);
    }
  }
  return LikelihoodMap(dims, std::move(out));
}

LikelihoodMap scale_unit(const LikelihoodMap& m) {
  const double peak = m.max();
  if (!(peak > 0.0)) return m;
  LikelihoodMap out = m;
  for (double& v : out.values()) v /= peak;
  return out;
}

double search_threshold(const LikelihoodMap& m) {
  double total = 0.0;
  std::size_t n = 0;
  for (double v : m.values()) {
    if (v > 0.0) {
      total += v;
      ++n;
    }
  }
  if (n == 0) return kNoSearch;
  return total / static_cast<double>(n);
}

LikelihoodMap channel_average(const FeatureMap& f) {
  LikelihoodMap out(ImageDims{f.width(), f.height()});
  const double inv = 1.0 / static_cast<double>(f.depth());
  for (std::size_t i = 0; i < f.height(); ++i) {
    for (std::size_t j = 0; j < f.width(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < f.depth(); ++k) acc += f.at(i, j, k);
      out.at(i, j) = acc * inv;
    }
  }
  return out;
}

namespace {

struct Tap {
  std::size_t src;
  double weight;
};

// For every output cell along one axis, the source cells it overlaps and the
// overlap length, normalised so the taps of each output cell sum to 1.
std::vector<std::vector<Tap>> area_taps(std::size_t src_len, std::size_t dst_len) {
  std::vector<std::vector<Tap>> taps(dst_len);
  const double ratio = static_cast<double>(src_len) / static_cast<double>(dst_len);
  for (std::size_t o = 0; o < dst_len; ++o) {
    const double lo = static_cast<double>(o) * ratio;
    const double hi = static_cast<double>(o + 1) * ratio;
    auto first = static_cast<std::size_t>(std::floor(lo));
    auto last = std::min(src_len, static_cast<std::size_t>(std::ceil(hi)));
    double total = 0.0;
    for (std::size_t s = first; s < last; ++s) {
      const double overlap = std::min(hi, static_cast<double>(s + 1)) -
                             std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) {
        taps[o].push_back({s, overlap});
        total += overlap;
      }
    }
    for (Tap& t : taps[o]) t.weight /= total;
  }
  return taps;
}

}  // namespace

LikelihoodMap resize_area(const LikelihoodMap& m, const ImageDims& target) {
  require(target.valid(), "resize_area: target dims must be positive");
  if (m.dims() == target) return m;

  const auto col_taps = area_taps(m.width(), target.width);
  const auto row_taps = area_taps(m.height(), target.height);

  // Horizontal pass into an H x w intermediate, then vertical.
  std::vector<double> tmp(m.height() * target.width, 0.0);
  for (std::size_t i = 0; i < m.height(); ++i) {
    for (std::size_t j = 0; j < target.width; ++j) {
      double acc = 0.0;
      for (const Tap& t : col_taps[j]) acc += t.weight * m.at(i, t.src);
      tmp[i * target.width + j] = acc;
    }
  }
  LikelihoodMap out(target);
  for (std::size_t i = 0; i < target.height; ++i) {
    for (std::size_t j = 0; j < target.width; ++j) {
      double acc = 0.0;
      for (const Tap& t : row_taps[i]) acc += t.weight * tmp[t.src * target.width + j];
      out.at(i, j) = acc;
    }
  }
  return out;
}

LikelihoodMap merge_maps(std::span<const LikelihoodMap> maps,
                         std::span<const int> labels, const ImageDims& target) {
  require(maps.size() == labels.size(), "merge_maps: one map per class expected");
  const LikelihoodMap* first = nullptr;
  std::size_t positives = 0;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] != 1) continue;
    ++positives;
    if (first == nullptr) {
      first = &maps[c];
    } else {
      require(maps[c].dims() == first->dims(), "merge_maps: map dims differ");
    }
  }
  require(positives > 0, "merge_maps: label vector has no positive class");

  LikelihoodMap mean(first->dims());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] != 1) continue;
    auto src = maps[c].values();
    auto dst = mean.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  if (positives > 1) {
    const double inv = 1.0 / static_cast<double>(positives);
    for (double& v : mean.values()) v *= inv;
  }
  return resize_area(mean, target);
}

}  // namespace slv
