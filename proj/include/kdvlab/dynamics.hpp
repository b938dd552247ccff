#pragma once

#include "kdvlab/coefficients.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kdvlab {

/// -u''' + 6 u u', with 6uu' formed as 3 (u^2)' from a dealiased square.
RealField kdv_terms(const RealField& u);
/// Full right side -u''' + 6uu' + (a1 u')' + a2 u^2 + a3 u' + a4 u.
RealField gkdv_rhs(const RealField& u, double t, const CoefficientSet& coeffs);

/// 0.4 / xi_max^3.
double default_time_step(const TorusGrid& grid);

using NonlinearTerm = std::function<RealField(const RealField& u, double t)>;

/// Integrating-factor RK4 for u_t = -c u''' + N(u, t); the linear part has symbol
/// c i xi^3 and is integrated exactly.
class IntegratingFactorRK4 {
public:
  IntegratingFactorRK4(const TorusGrid& grid, double dispersion, double dt);

  double dt() const noexcept { return dt_; }
  RealField step(const RealField& u, double t, const NonlinearTerm& nonlinear) const;

private:
  TorusGrid grid_;
  double dt_;
  std::vector<Complex> half_;  // exp(lambda dt / 2)
  std::vector<Complex> full_;  // exp(lambda dt)
};

/// Nonlinear part of gkdv_rhs for the integrating-factor scheme: 3(u^2)' + P(u).
NonlinearTerm gkdv_nonlinear(const CoefficientSet& coeffs);

RealField step(const RealField& u, double t, double dt, const CoefficientSet& coeffs);

struct DiagnosticRecord {
  double t = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  std::vector<double> alpha;      // one per configured kappa; NaN where not admissible
  std::vector<double> h1k_norm;   // ||u||_{H^{-1}_kappa} per kappa
  double max_abs = 0.0;
  bool diverged = false;
};

struct Trajectory {
  TorusGrid grid;
  double dt = 0.0;
  std::vector<double> kappas;
  std::vector<double> times;
  std::vector<RealField> snapshots;
  std::vector<DiagnosticRecord> records;
  bool diverged = false;
  std::string coeff_descriptor = "zero";

  explicit Trajectory(const TorusGrid& g) : grid(g) {}
  std::size_t size() const noexcept { return times.size(); }
};

struct SolveOptions {
  /// Magnitude of the time step; 0 selects default_time_step.
  double dt = 0.0;
  /// Steps between saved snapshots; 0 selects a value giving at least 200 records.
  std::size_t save_every = 0;
  std::vector<double> kappas;
  bool record_alpha = true;
  bool throw_on_divergence = false;
  double divergence_threshold = 1e6;
};

DiagnosticRecord make_record(const RealField& u, double t, const std::vector<double>& kappas, bool record_alpha);

/// Integrates from t = 0 to t = T (T may be negative). Snapshots are stored with
/// increasing times in either direction.
Trajectory solve(const RealField& u0, double T, const CoefficientSet& coeffs, const SolveOptions& opts = {});
/// Solves backward to -T and forward to T and merges the two on [-T, T].
Trajectory solve_symmetric(const RealField& u0, double T, const CoefficientSet& coeffs, const SolveOptions& opts = {});

/// Same as solve, but for a caller-supplied dispersion coefficient and nonlinearity.
Trajectory integrate(const RealField& u0, double T, double dispersion, const NonlinearTerm& nonlinear,
                     const SolveOptions& opts);

/// Spacing of saved times; throws NonUniformSaveInterval when it varies.
double uniform_save_interval(const Trajectory& traj);

/// Centered-difference residual of d/dt int u^2/2 against the energy identity right side.
std::vector<double> l2_identity_residual(const Trajectory& traj, const CoefficientSet& coeffs);
/// Right side int [-a1 (u')^2 + a2 u^3 - a3' u^2 / 2 + a4 u^2] dx.
double l2_identity_rhs(const RealField& u, double t, const CoefficientSet& coeffs);

/// |alpha(t) - alpha(0)| / max(alpha(0), 1e-14) along the trajectory.
std::vector<double> alpha_drift(const Trajectory& traj, KappaParam kappa, double admissibility_constant = 10.0);

/// True when kappa >= 1 + C ||u||^2_{H^{-1}_kappa}.
bool kappa_admissible(const RealField& u, KappaParam kappa, double admissibility_constant = 10.0);

struct MicrolawBalance {
  double alpha_change;
  double forcing_integral;
  double mismatch;  // |alpha_change - forcing_integral| / max(alpha(0), 1e-10)
};
/// Compares alpha(T) - alpha(0) with the Simpson time integral of int drho|_u(P) dx.
MicrolawBalance integrated_microlaw(const Trajectory& traj, KappaParam kappa, const CoefficientSet& coeffs);

} // namespace kdvlab
