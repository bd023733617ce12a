#include "slv/reference.hpp"

namespace slv::reference {

StepThroughResult adaptive_search_step_through(LikelihoodMap m, int step, double tolerance) {
  StepThroughResult out;
  const long H = static_cast<long>(m.height());
  const long W = static_cast<long>(m.width());

  double sum = 0.0;
  long nonzero = 0;
  for (long i = 0; i < H; ++i) {
    for (long j = 0; j < W; ++j) {
      const double v = m.at(i, j);
      if (v > 0.0) {
        sum += v;
        ++nonzero;
      }
    }
  }
  if (nonzero == 0) return out;
  const double t_search = sum / static_cast<double>(nonzero);

  auto value = [&](long y, long x) { return m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)); };
  auto in_range = [&](long y, long x) { return y >= 0 && y < H && x >= 0 && x < W; };

  while (true) {
    long yi = 0, xi = 0;
    double best = value(0, 0);
    for (long i = 0; i < H; ++i) {
      for (long j = 0; j < W; ++j) {
        if (value(i, j) > best) {
          best = value(i, j);
          yi = i;
          xi = j;
        }
      }
    }
    if (!(best >= t_search)) break;
    ++out.iterations;

    // left
    double p_min = 1.0;
    long x_l = xi;
    while (in_range(yi, x_l) && t_search <= value(yi, x_l) && value(yi, x_l) <= p_min + tolerance) {
      p_min = value(yi, x_l);
      x_l = x_l - step;
    }
    if (x_l < 0) x_l = 0;

    // up
    p_min = 1.0;
    long y_t = yi;
    while (in_range(y_t, xi) && t_search <= value(y_t, xi) && value(y_t, xi) <= p_min + tolerance) {
      p_min = value(y_t, xi);
      y_t = y_t - step;
    }
    if (y_t < 0) y_t = 0;

    // right
    p_min = 1.0;
    long x_r = xi;
    while (in_range(yi, x_r) && t_search <= value(yi, x_r) && value(yi, x_r) <= p_min + tolerance) {
      p_min = value(yi, x_r);
      x_r = x_r + step;
    }
    if (x_r > W - 1) x_r = W - 1;

    // down
    p_min = 1.0;
    long y_b = yi;
    while (in_range(y_b, xi) && t_search <= value(y_b, xi) && value(y_b, xi) <= p_min + tolerance) {
      p_min = value(y_b, xi);
      y_b = y_b + step;
    }
    if (y_b > H - 1) y_b = H - 1;

    out.boxes.push_back({static_cast<double>(x_l), static_cast<double>(y_t),
                         static_cast<double>(x_r + 1), static_cast<double>(y_b + 1)});
    for (long i = y_t; i <= y_b; ++i) {
      for (long j = x_l; j <= x_r; ++j) m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 0.0;
    }
  }
  return out;
}

}  // namespace slv::reference
