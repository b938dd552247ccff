#pragma once

#include "kdvlab/coefficients.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/grid.hpp"

#include <array>
#include <string>
#include <vector>

namespace kdvlab {

/// Translates of psi = sech(x/6) (periodized) and of the ramp phi with phi' = psi^2.
class WeightFamily {
public:
  /// Centers at every `stride`-th grid point.
  explicit WeightFamily(const TorusGrid& grid, std::size_t stride = 4);
  WeightFamily(const TorusGrid& grid, std::vector<double> centers);

  const TorusGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& centers() const noexcept { return centers_; }

  RealField psi(double center) const;
  /// phi = m (x - x0) + periodic part, m the mean of psi^2; on the line this is 6 tanh((x - x0)/6).
  RealField phi(double center) const;
  /// phi' computed spectrally from the periodic part plus the ramp slope.
  RealField phi_prime(double center) const;

private:
  TorusGrid grid_;
  std::vector<double> centers_;
  RealField psi0_;
};

/// sup over centers of ||psi_{x0} u'||_{L^2_t H^{-1}_kappa}, trapezoidal in time.
double ls_norm(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights);
/// Per-center squared values before the sup.
std::vector<double> ls_profile(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights);

/// sup over centers of int int_{|x - x0| < 1} u^2 dx dt.
double local_mass(const Trajectory& traj, std::size_t center_stride = 4);

enum class HypothesisMode { Integral, Pointwise };

struct CoefficientMeasure {
  int index = 0;
  /// Integral mode: the smaller of the two admissible norms; pointwise mode: the
  /// smallest delta with |a| + |a'| <= delta (1 + x^2)^{-1}.
  double value = 0.0;
  /// Integral mode: the other norm alternative; pointwise mode: the smallest delta
  /// with |a| <= delta (1 + x^2)^{-1}.
  double alternative = 0.0;
  std::string norm_used;
  bool decaying = true;
  std::vector<double> positions;  // z (integral) or x (pointwise)
  std::vector<double> profile;    // integrand or weighted pointwise value
};

struct HypothesisReport {
  HypothesisMode mode;
  std::array<CoefficientMeasure, 4> coeffs;
};

struct HypothesisOptions {
  std::vector<double> times{0.0};
  std::size_t center_stride = 4;
};

HypothesisReport hypothesis_check(const CoefficientSet& coeffs, HypothesisMode mode, const HypothesisOptions& opts = {});

struct BootstrapRecord {
  double T = 0.0;
  double kappa = 1.0;
  double sup_H1k = 0.0;  // ||u||^2_{C_t H^{-1}_kappa}
  double ls_sq = 0.0;    // ||u||^2_{LS_kappa}
  double B_T = 0.0;
  double R = 0.0;
  double epsilon = 0.0;
  bool admissible = true;
  bool fitted = false;
  /// Smallest C with B_T <= C R^2 + C (eps + (T kappa^2)^{1/4} + kappa^{-2}) B_T.
  double fitted_C = 0.0;
  std::string note;
};

BootstrapRecord bootstrap_audit(const Trajectory& traj, KappaParam kappa, double R, double epsilon,
                                const WeightFamily& weights, double admissibility_constant = 10.0);

struct Horizon {
  double time = 0.0;
  /// False when the running quantity stayed below the threshold over the whole trajectory.
  bool reached = false;
};

/// First saved time at which the running B_t = sup_{s<=t} ||u(s)||^2_{H^{-1}_kappa} + ls_sq(t)/4
/// exceeds the threshold; the LS integral runs from the first snapshot.
Horizon bootstrap_horizon(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights, double threshold);

} // namespace kdvlab
