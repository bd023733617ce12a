#include <algorithm>
#include <cmath>

#include "slv/errors.hpp"
#include "slv/reference.hpp"

namespace slv::reference {

LikelihoodMap accumulate_brute_force(const ScoredProposals& proposals, const ImageDims& dims) {
  require(proposals.boxes.size() == proposals.scores.size(),
          "accumulate_brute_force: boxes and scores differ in length");
  LikelihoodMap out(dims);
  const auto w = static_cast<double>(dims.width), h = static_cast<double>(dims.height);
  for (std::size_t r = 0; r < proposals.boxes.size(); ++r) {
    const Box& b = proposals.boxes[r];
    const double x0 = std::clamp(std::nearbyint(b.x_min), 0.0, w);
    const double x1 = std::clamp(std::nearbyint(b.x_max), 0.0, w);
    const double y0 = std::clamp(std::nearbyint(b.y_min), 0.0, h);
    const double y1 = std::clamp(std::nearbyint(b.y_max), 0.0, h);
    for (auto i = static_cast<std::size_t>(y0); static_cast<double>(i) < y1; ++i) {
      for (auto j = static_cast<std::size_t>(x0); static_cast<double>(j) < x1; ++j) {
        out.at(i, j) += proposals.scores[r];
      }
    }
  }
  return out;
}

}  // namespace slv::reference
