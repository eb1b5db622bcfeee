#include "bgn/expressiveness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "bgn/error.hpp"

namespace bgn {

namespace {

// 0/1 activation: the output is a plain sum of the weights of active units.
constexpr ActivationParams kIndicator{0.0, 0.0, 1.0};

// Output weight of the j-th step when the level after j+1 steps is (j+1)*step.
// fl((j+1)step) - fl(j step) is exact, so adding the weights of a prefix of
// steps in order reproduces fl(n*step) exactly, and subtracting them in
// reverse order returns to exactly zero.
double step_weight(std::size_t j, double step) {
  return static_cast<double>(j + 1) * step - static_cast<double>(j) * step;
}

struct Unit {
  std::array<double, 2> w;
  double b;
  double out;
};

}  // namespace

BannModel build_square_approximator(int r) {
  if (r < 1) throw ConfigError("square approximator needs r >= 1");
  const auto width = static_cast<Eigen::Index>(r);
  LayerParams hidden{Matrix(width, 1), Vector(width)};
  LayerParams output{Matrix(1, width), Vector::Zero(1)};
  const double step = 1.0 / static_cast<double>(r);
  for (Eigen::Index k = 0; k < width; ++k) {
    // Level k/r -> (k+1)/r where x^2 crosses the midpoint (k + 1/2)/r.
    hidden.weights(k, 0) = 1.0;
    hidden.biases[k] = -std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(r));
    output.weights(0, k) = step_weight(static_cast<std::size_t>(k), step);
  }
  return BannModel(kIndicator, {std::move(hidden)}, std::move(output));
}

BannModel build_product_approximator(double m, double delta) {
  if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("product approximator needs m > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("product approximator needs 0 < delta < 1");

  // Staircase S(s) for s^2 with level spacing h = m^2 / steps: error <= h/2,
  // so (|S(x+y) - (x+y)^2| + |S(x) - x^2| + |S(y) - y^2|) / 2 <= 3h/4 <= 3 m^2 delta.
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / (4.0 * delta)));
  const double h = m * m / static_cast<double>(steps);
  const double out_step = h / 2.0;
  const std::size_t sum_steps = 4 * steps;  // |x+y| <= 2m reaches level 4 m^2
  std::vector<double> thresholds(sum_steps);
  for (std::size_t j = 0; j < sum_steps; ++j) {
    thresholds[j] = std::sqrt((static_cast<double>(j) + 0.5) * h);
  }

  std::vector<Unit> units;
  units.reserve(2 * (sum_steps + 2 * steps));
  // (x + y) block, ascending; each threshold as a mirrored pair for |x + y|.
  for (std::size_t j = 0; j < sum_steps; ++j) {
    const double wt = step_weight(j, out_step);
    units.push_back({{1.0, 1.0}, -thresholds[j], wt});
    units.push_back({{-1.0, -1.0}, -thresholds[j], wt});
  }
  // x and y blocks share the first `steps` thresholds, descending.
  for (const std::array<double, 2> axis : {std::array<double, 2>{1.0, 0.0}, {0.0, 1.0}}) {
    for (std::size_t j = steps; j-- > 0;) {
      const double wt = step_weight(j, out_step);
      units.push_back({{axis[0], axis[1]}, -thresholds[j], -wt});
      units.push_back({{-axis[0], -axis[1]}, -thresholds[j], -wt});
    }
  }

  const auto width = static_cast<Eigen::Index>(units.size());
  LayerParams hidden{Matrix(width, 2), Vector(width)};
  LayerParams output{Matrix(1, width), Vector::Zero(1)};
  for (Eigen::Index u = 0; u < width; ++u) {
    const Unit& unit = units[static_cast<std::size_t>(u)];
    hidden.weights(u, 0) = unit.w[0];
    hidden.weights(u, 1) = unit.w[1];
    hidden.biases[u] = unit.b;
    output.weights(0, u) = unit.out;
  }
  return BannModel(kIndicator, {std::move(hidden)}, std::move(output));
}

Certificate certify_square(const BannModel& model, int r, std::size_t points) {
  if (r < 1 || points < 2) throw ConfigError("invalid square certificate parameters");
  Certificate cert{1.0 / (2.0 * static_cast<double>(r)), 0.0};
  Vector x(1);
  for (std::size_t i = 0; i < points; ++i) {
    x[0] = static_cast<double>(i) / static_cast<double>(points - 1);
    const double err = std::abs(forward(model, x)[0] - x[0] * x[0]);
    cert.measured_error = std::max(cert.measured_error, err);
  }
  return cert;
}

Certificate certify_product(const BannModel& model, double m, double delta, std::size_t per_axis) {
  if (!(m > 0.0) || per_axis < 2) throw ConfigError("invalid product certificate parameters");
  Certificate cert{3.0 * m * m * delta, 0.0};
  Vector xy(2);
  for (std::size_t i = 0; i < per_axis; ++i) {
    xy[0] = -m + 2.0 * m * static_cast<double>(i) / static_cast<double>(per_axis - 1);
    for (std::size_t j = 0; j < per_axis; ++j) {
      xy[1] = -m + 2.0 * m * static_cast<double>(j) / static_cast<double>(per_axis - 1);
      const double err = std::abs(forward(model, xy)[0] - xy[0] * xy[1]);
      cert.measured_error = std::max(cert.measured_error, err);
    }
  }
  return cert;
}

}  // namespace bgn
