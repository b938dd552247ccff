#include "kdvlab/initial_data.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kdvlab {

RealField soliton(const TorusGrid& grid, double c, double x0, double t) {
  return sample(grid, [&](double x) {
    const double s = 1.0 / std::cosh(c * (x - x0 - 4.0 * c * c * t));
    return -2.0 * c * c * s * s;
  });
}

RealField gaussian(const TorusGrid& grid, double amplitude, double width, double center) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian width must be positive");
  return sample(grid, [&](double x) {
    const double z = (x - center) / width;
    return amplitude * std::exp(-z * z);
  });
}

RealField random_bandlimited(const TorusGrid& grid, KappaParam kappa, double target_norm, std::uint64_t seed) {
  if (!(target_norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "target norm must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const std::size_t n = grid.points();
  const double four_k2 = 4.0 * kappa.value() * kappa.value();
  Spectrum s(grid);
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    if (3 * k > n) break;
    const double xi = grid.xi_half(k);
    const double amp = 1.0 / std::sqrt(xi * xi + four_k2);
    const double theta = phase(rng);
    s.bins[k] = k == 0 ? Complex(amp * (std::cos(theta) >= 0.0 ? 1.0 : -1.0), 0.0) : std::polar(amp, theta);
  }
  RealField u = inverse(s);
  u *= target_norm / sobolev_kappa_norm(u, -1.0, kappa);
  return u;
}

} // namespace kdvlab
