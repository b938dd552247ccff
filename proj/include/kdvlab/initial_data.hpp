#pragma once

#include "kdvlab/grid.hpp"

#include <cstdint>

namespace kdvlab {

/// -2c^2 sech^2(c (x - x0 - 4 c^2 t)), an exact solution of u_t = -u''' + 6uu'.
RealField soliton(const TorusGrid& grid, double c, double x0 = 0.0, double t = 0.0);

/// amplitude * exp(-((x - center)/width)^2).
RealField gaussian(const TorusGrid& grid, double amplitude, double width = 1.0, double center = 0.0);

/// Random band-limited field with |u_hat(xi)| proportional to (xi^2 + 4 kappa^2)^{-1/2}
/// for |k| <= N/3, seeded random phases, scaled to the given H^{-1}_kappa norm.
RealField random_bandlimited(const TorusGrid& grid, KappaParam kappa, double target_norm, std::uint64_t seed);

} // namespace kdvlab
