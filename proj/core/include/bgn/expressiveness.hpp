#pragma once

#include <cstddef>

#include "bgn/model.hpp"

namespace bgn {

/// Single-hidden-layer network approximating x^2 on [0, 1] by a staircase
/// with levels 0, 1/r, ..., 1. Hidden width r, sup error 1/(2r), exact at 0 and 1.
BannModel build_square_approximator(int r);

/// Two-input network approximating x*y on [-m, m]^2 through
/// xy = ((x+y)^2 - x^2 - y^2) / 2, each square realized by mirrored staircase
/// neurons on a shared threshold grid. Sup error at most 3 m^2 delta; the
/// output is exactly 0 whenever x == 0 or y == 0.
BannModel build_product_approximator(double m, double delta);

struct Certificate {
  double claimed_bound = 0.0;
  double measured_error = 0.0;

  bool holds() const { return measured_error <= claimed_bound; }
};

/// Max |B(x) - x^2| over `points` evenly spaced x in [0, 1] (endpoints included).
Certificate certify_square(const BannModel& model, int r, std::size_t points = 100'000);

/// Max |B(x, y) - xy| over a `per_axis` x `per_axis` grid on [-m, m]^2.
Certificate certify_product(const BannModel& model, double m, double delta,
                            std::size_t per_axis = 300);

}  // namespace bgn
