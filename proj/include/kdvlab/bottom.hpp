#pragma once

#include "kdvlab/coefficients.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/spectral.hpp"

#include <optional>

namespace kdvlab {

/// Channel bottom c(x), b = sqrt(1 - c) with spectral derivatives, and the map
/// y(x) = int_0^x b^{-5/3}, written as y = m x + p(x) with p periodic.
class BottomProfile {
public:
  BottomProfile(const RealField& c, double margin = 0.1);

  const TorusGrid& x_grid() const noexcept { return c_.grid; }
  /// Grid of the same point count on the y-torus of length m L.
  const TorusGrid& y_grid() const noexcept { return y_grid_; }

  const RealField& c() const noexcept { return c_; }
  const RealField& b() const noexcept { return b_; }
  /// Spectral derivatives b', b'', b'''.
  const RealField& db(int order) const;
  double margin() const noexcept { return margin_; }
  /// Mean of b^{-5/3}; the slope of y.
  double slope() const noexcept { return slope_; }

  /// y(x_i) on the x-grid.
  const RealField& y_map() const noexcept { return y_samples_; }
  double y(double x) const;
  double y_prime(double x) const;
  /// Inverse map by Newton iteration on the spectral interpolant.
  double y_inverse(double y) const;

private:
  RealField c_;
  double margin_;
  RealField b_;
  RealField b1_, b2_, b3_;
  double slope_;
  TorusGrid y_grid_;
  RealField periodic_;
  std::optional<TrigInterpolant> periodic_interp_;
  RealField y_samples_;
  RealField y_prime_samples_;
};

BottomProfile build_profile(const RealField& c, double margin = 0.1);

/// Coefficient fields on the y-grid, evaluated at y-grid points through x = y^{-1}(y).
struct SynthesizedCoefficients {
  RealField a2, a3, a4;
};
SynthesizedCoefficients synth_fields(const BottomProfile& profile);
/// gKdV coefficients (a1 = 0) on the y-grid; they translate as a_j(t, y) = a_j(0, y + 4t).
CoefficientSet synth_coefficients(const BottomProfile& profile);

struct TransformResult {
  RealField field;
  double out_of_band;
  /// Set when the resampled field carries more than 1e-6 of its energy above N/3.
  bool aliased;
};

/// u(t, x) = b^{5/3}(x) v(t, y(x) - 4t).
TransformResult transform_forward(const RealField& v, double t, const BottomProfile& profile);
/// v(t, y) = b^{-5/3}(x) u(t, x) at x = y^{-1}(y + 4t).
TransformResult transform_backward(const RealField& u, double t, const BottomProfile& profile);

/// Right side -b^5 u''' + 6uu' - 4bu' - 6b'u of the variable-bottom equation.
RealField kdvvb_rhs(const RealField& u, const BottomProfile& profile);

/// Integrates the variable-bottom equation directly. The integrating factor uses
/// the largest b^5; the rest of the dispersion is explicit.
Trajectory solve_kdvvb(const RealField& u0, double T, const BottomProfile& profile, const SolveOptions& opts = {});

/// sech2 bottom c(x) = amplitude * sech^2(x / width).
RealField sech2_bottom(const TorusGrid& grid, double amplitude, double width);

} // namespace kdvlab
