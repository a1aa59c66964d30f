#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace oracle {

// Hopf coordinates (eta, xi1, xi2) -> (cos eta e^{i xi1}, sin eta e^{i xi2}).
// The Berger metric is the round one minus (1 - rho^2) times the square of
// the Hopf one-form; the volume density is sqrt(det G) from the 3x3 Gram matrix.
inline double berger_volume_mc(double rho, int samples, std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ueta(0.0, pi / 2.0);
  const double box = (pi / 2.0) * (2.0 * pi) * (2.0 * pi);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double eta = ueta(rng);
    const double c = std::cos(eta), sn = std::sin(eta);
    // round metric: diag(1, c^2, s^2); Hopf one-form (0, c^2, s^2)
    std::array<std::array<double, 3>, 3> g{};
    g[0][0] = 1.0;
    g[1][1] = c * c;
    g[2][2] = sn * sn;
    const std::array<double, 3> th{0.0, c * c, sn * sn};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[i][j] -= (1.0 - rho * rho) * th[i] * th[j];
    const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                       g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                       g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    sum += std::sqrt(std::max(det, 0.0));
  }
  return box * sum / samples;
}

}  // namespace oracle
