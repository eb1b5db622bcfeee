#pragma once

// Stand-in for the combined-cycle power plant regression data (9568 hourly
// readings of ambient temperature AT, exhaust vacuum V, ambient pressure AP
// and relative humidity RH against net output PE). Feature ranges, means,
// spreads and pairwise correlations follow the published dataset summary; the
// target is the well-known linear fit of that data plus a smooth curvature
// in AT and Gaussian noise. If BGN_POWER_PLANT_CSV names a file with columns
// AT,V,AP,RH,PE it is loaded instead.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "bgn/io.hpp"

namespace bgn::testkit {

struct PowerPlantData {
  Dataset data;
  bool synthetic = true;
  std::string source;
};

inline Dataset synthetic_power_plant(std::size_t m = 9568, std::uint64_t seed = 20140601) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(m), 4);
  Matrix y(static_cast<Eigen::Index>(m), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z = n01(rng);
    const double at = std::clamp(19.65 + 7.45 * z, 1.81, 37.11);
    const double v = std::clamp(54.31 + 12.71 * (0.84 * z + 0.54 * n01(rng)), 25.36, 81.56);
    const double ap = std::clamp(1013.26 + 5.94 * (-0.51 * z + 0.86 * n01(rng)), 992.89, 1033.30);
    const double rh = std::clamp(73.31 + 14.60 * (-0.54 * z + 0.84 * n01(rng)), 25.56, 100.16);
    const double curve = 0.045 * (at - 19.65) * (at - 19.65) - 2.5;
    const double pe = 454.61 - 1.977 * at - 0.234 * v + 0.062 * ap - 0.158 * rh + curve +
                      3.6 * n01(rng);
    x(i, 0) = at;
    x(i, 1) = v;
    x(i, 2) = ap;
    x(i, 3) = rh;
    y(i, 0) = pe;
  }
  return Dataset(std::move(x), std::move(y), {"AT", "V", "AP", "RH"}, {"PE"});
}

inline PowerPlantData power_plant_data() {
  if (const char* path = std::getenv("BGN_POWER_PLANT_CSV"); path != nullptr && *path != '\0') {
    return {load_csv(path, LabelSpec{1, {}}), false, path};
  }
  return {synthetic_power_plant(), true, "synthetic stand-in"};
}

}  // namespace bgn::testkit
