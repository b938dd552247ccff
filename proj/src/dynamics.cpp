#include "kdvlab/dynamics.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/lax.hpp"
#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kdvlab {

RealField kdv_terms(const RealField& u) {
  RealField out = derivative(u, 3) * -1.0;
  out += derivative(dealiased_product(u, u), 1) * 3.0;
  return out;
}

RealField gkdv_rhs(const RealField& u, double t, const CoefficientSet& coeffs) {
  if (!u.all_finite()) throw Error(ErrorCode::Diverged, "non-finite field passed to the right side");
  RealField out = kdv_terms(u);
  if (!coeffs.all_zero()) out += coefficient_terms(u, t, coeffs);
  return out;
}

double default_time_step(const TorusGrid& grid) {
  const double k = grid.xi_max();
  return 0.4 / (k * k * k);
}

IntegratingFactorRK4::IntegratingFactorRK4(const TorusGrid& grid, double dispersion, double dt)
    : grid_(grid), dt_(dt), half_(grid.points() / 2 + 1), full_(grid.points() / 2 + 1) {
  if (!std::isfinite(dt) || dt == 0.0) throw Error(ErrorCode::InvalidArgument, "time step must be finite and nonzero");
  const std::size_t nyq = grid.points() / 2;
  for (std::size_t k = 0; k <= nyq; ++k) {
    const double xi = grid.xi_half(k);
    const double omega = (k == nyq) ? 0.0 : dispersion * xi * xi * xi;
    half_[k] = std::polar(1.0, 0.5 * omega * dt);
    full_[k] = std::polar(1.0, omega * dt);
  }
}

RealField IntegratingFactorRK4::step(const RealField& u, double t, const NonlinearTerm& nonlinear) const {
  const std::size_t nb = half_.size();
  const double dt = dt_;
  auto eval = [&](const Spectrum& s, double time) {
    Spectrum out = forward(nonlinear(inverse(s), time));
    for (auto& b : out.bins) b *= dt;
    return out;
  };
  const Spectrum v = forward(u);
  const Spectrum a = eval(v, t);
  Spectrum tmp(grid_);
  for (std::size_t k = 0; k < nb; ++k) tmp.bins[k] = half_[k] * (v.bins[k] + 0.5 * a.bins[k]);
  const Spectrum b = eval(tmp, t + 0.5 * dt);
  for (std::size_t k = 0; k < nb; ++k) tmp.bins[k] = half_[k] * v.bins[k] + 0.5 * b.bins[k];
  const Spectrum c = eval(tmp, t + 0.5 * dt);
  for (std::size_t k = 0; k < nb; ++k) tmp.bins[k] = full_[k] * v.bins[k] + half_[k] * c.bins[k];
  const Spectrum d = eval(tmp, t + dt);
  for (std::size_t k = 0; k < nb; ++k)
    tmp.bins[k] = full_[k] * v.bins[k] +
                  (full_[k] * a.bins[k] + 2.0 * half_[k] * (b.bins[k] + c.bins[k]) + d.bins[k]) / 6.0;
  return inverse(tmp);
}

NonlinearTerm gkdv_nonlinear(const CoefficientSet& coeffs) {
  return [coeffs](const RealField& u, double t) {
    if (!u.all_finite()) throw Error(ErrorCode::Diverged, "non-finite field inside a time step");
    RealField out = derivative(dealiased_product(u, u), 1) * 3.0;
    if (!coeffs.all_zero()) out += coefficient_terms(u, t, coeffs);
    return out;
  };
}

RealField step(const RealField& u, double t, double dt, const CoefficientSet& coeffs) {
  const IntegratingFactorRK4 stepper(u.grid, 1.0, dt);
  return stepper.step(u, t, gkdv_nonlinear(coeffs));
}

bool kappa_admissible(const RealField& u, KappaParam kappa, double admissibility_constant) {
  const double n2 = sobolev_kappa_norm_squared(u, -1.0, kappa);
  return kappa.value() >= 1.0 + admissibility_constant * n2;
}

DiagnosticRecord make_record(const RealField& u, double t, const std::vector<double>& kappas, bool record_alpha) {
  DiagnosticRecord r;
  r.t = t;
  r.max_abs = u.max_abs();
  r.diverged = !u.all_finite();
  if (r.diverged) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.mass = r.momentum = nan;
    r.alpha.assign(kappas.size(), nan);
    r.h1k_norm.assign(kappas.size(), nan);
    return r;
  }
  r.mass = integral(u);
  r.momentum = 0.5 * u.samples.squaredNorm() * u.grid.dx();
  for (double k : kappas) {
    const KappaParam kp(k);
    r.h1k_norm.push_back(sobolev_kappa_norm(u, -1.0, kp));
    double a = std::numeric_limits<double>::quiet_NaN();
    if (record_alpha) {
      try {
        a = alpha_value(u, kp);
      } catch (const Error&) {
        // Left as NaN: kappa is not admissible for this snapshot.
      }
    }
    r.alpha.push_back(a);
  }
  return r;
}

Trajectory integrate(const RealField& u0, double T, double dispersion, const NonlinearTerm& nonlinear,
                     const SolveOptions& opts) {
  if (!u0.all_finite()) throw Error(ErrorCode::NonFiniteInput, "initial data has non-finite samples");
  if (!std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "final time must be finite");
  for (double k : opts.kappas) KappaParam{k};
  Trajectory traj(u0.grid);
  traj.kappas = opts.kappas;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u0);
  traj.records.push_back(make_record(u0, 0.0, opts.kappas, opts.record_alpha));
  if (T == 0.0) return traj;

  const double dt_mag = opts.dt > 0.0 ? opts.dt : default_time_step(u0.grid);
  auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(T) / dt_mag - 1e-9)));
  const std::size_t save_every = opts.save_every > 0 ? opts.save_every : std::max<std::size_t>(1, steps / 200);
  // Round up so the final time is a save point and the save interval stays uniform.
  steps = (steps + save_every - 1) / save_every * save_every;
  const double dt = T / static_cast<double>(steps);
  traj.dt = dt;
  const IntegratingFactorRK4 stepper(u0.grid, dispersion, dt);

  RealField u = u0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = dt * static_cast<double>(n - 1);
    bool bad = false;
    try {
      u = stepper.step(u, t, nonlinear);
      bad = !u.all_finite() || u.max_abs() > opts.divergence_threshold;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Diverged) throw;
      bad = true;
    }
    const double tn = dt * static_cast<double>(n);
    if (bad) {
      traj.diverged = true;
      if (opts.throw_on_divergence)
        throw Error(ErrorCode::Diverged, "solution diverged at t = " + std::to_string(tn));
      DiagnosticRecord r = make_record(u, tn, {}, false);
      r.diverged = true;
      r.alpha.assign(opts.kappas.size(), std::numeric_limits<double>::quiet_NaN());
      r.h1k_norm.assign(opts.kappas.size(), std::numeric_limits<double>::quiet_NaN());
      traj.times.push_back(tn);
      traj.snapshots.push_back(u);
      traj.records.push_back(r);
      break;
    }
    if (n % save_every == 0) {
      traj.times.push_back(tn);
      traj.snapshots.push_back(u);
      traj.records.push_back(make_record(u, tn, opts.kappas, opts.record_alpha));
    }
  }
  if (T < 0.0) {
    std::reverse(traj.times.begin(), traj.times.end());
    std::reverse(traj.snapshots.begin(), traj.snapshots.end());
    std::reverse(traj.records.begin(), traj.records.end());
  }
  return traj;
}

Trajectory solve(const RealField& u0, double T, const CoefficientSet& coeffs, const SolveOptions& opts) {
  if (u0.grid != coeffs.grid()) throw Error(ErrorCode::GridMismatch, "coefficients and initial data grids differ");
  Trajectory traj = integrate(u0, T, 1.0, gkdv_nonlinear(coeffs), opts);
  traj.coeff_descriptor = coeffs.metadata().descriptor;
  return traj;
}

Trajectory solve_symmetric(const RealField& u0, double T, const CoefficientSet& coeffs, const SolveOptions& opts) {
  const double span = std::abs(T);
  Trajectory back = solve(u0, -span, coeffs, opts);
  Trajectory fwd = solve(u0, span, coeffs, opts);
  Trajectory out = back;
  out.dt = fwd.dt;
  out.diverged = back.diverged || fwd.diverged;
  // Skip the duplicated t = 0 entry.
  for (std::size_t i = 1; i < fwd.size(); ++i) {
    out.times.push_back(fwd.times[i]);
    out.snapshots.push_back(fwd.snapshots[i]);
    out.records.push_back(fwd.records[i]);
  }
  return out;
}

double uniform_save_interval(const Trajectory& traj) {
  if (traj.size() < 2) throw Error(ErrorCode::TooFewSnapshots, "need at least two snapshots");
  const double h = traj.times[1] - traj.times[0];
  for (std::size_t i = 2; i < traj.size(); ++i) {
    const double hi = traj.times[i] - traj.times[i - 1];
    if (std::abs(hi - h) > 1e-9 * std::abs(h))
      throw Error(ErrorCode::NonUniformSaveInterval,
                  "save interval varies at index " + std::to_string(i) + " (" + std::to_string(hi) + " vs " +
                      std::to_string(h) + ")");
  }
  return h;
}

double l2_identity_rhs(const RealField& u, double t, const CoefficientSet& coeffs) {
  if (coeffs.all_zero()) return 0.0;
  const double dx = u.grid.dx();
  const Eigen::ArrayXd uu = u.samples.array();
  double total = 0.0;
  if (!coeffs.is_zero(1)) {
    const Eigen::ArrayXd du = derivative(u, 1).samples.array();
    total -= (coeffs.a(1, t).samples.array() * du.square()).sum();
  }
  if (!coeffs.is_zero(2)) total += (coeffs.a(2, t).samples.array() * uu.cube()).sum();
  if (!coeffs.is_zero(3)) total -= 0.5 * (derivative(coeffs.a(3, t), 1).samples.array() * uu.square()).sum();
  if (!coeffs.is_zero(4)) total += (coeffs.a(4, t).samples.array() * uu.square()).sum();
  return total * dx;
}

std::vector<double> l2_identity_residual(const Trajectory& traj, const CoefficientSet& coeffs) {
  if (traj.size() < 3) throw Error(ErrorCode::TooFewSnapshots, "energy identity needs at least three snapshots");
  const double h = uniform_save_interval(traj);
  std::vector<double> energy(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    energy[i] = 0.5 * traj.snapshots[i].samples.squaredNorm() * traj.grid.dx();
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double lhs = (energy[i + 1] - energy[i - 1]) / (2.0 * h);
    const double rhs = l2_identity_rhs(traj.snapshots[i], traj.times[i], coeffs);
    out.push_back(std::abs(lhs - rhs) / std::max(1.0, energy[i]));
  }
  return out;
}

std::vector<double> alpha_drift(const Trajectory& traj, KappaParam kappa, double admissibility_constant) {
  if (traj.size() == 0) throw Error(ErrorCode::EmptyTrajectory, "alpha drift of an empty trajectory");
  std::vector<double> alpha(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!kappa_admissible(traj.snapshots[i], kappa, admissibility_constant))
      throw Error(ErrorCode::KappaTooSmall, "kappa = " + std::to_string(kappa.value()) +
                                                " is not admissible at t = " + std::to_string(traj.times[i]));
    alpha[i] = alpha_value(traj.snapshots[i], kappa);
  }
  // The drift is measured from the earliest saved time.
  const double scale = std::max(alpha.front(), 1e-14);
  std::vector<double> out(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) out[i] = std::abs(alpha[i] - alpha.front()) / scale;
  return out;
}

MicrolawBalance integrated_microlaw(const Trajectory& traj, KappaParam kappa, const CoefficientSet& coeffs) {
  if (traj.size() < 3) throw Error(ErrorCode::TooFewSnapshots, "integrated microlaw needs at least three snapshots");
  const double h = uniform_save_interval(traj);
  const std::size_t n = traj.size();
  std::vector<double> alpha(n), forcing(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RealField& u = traj.snapshots[i];
    const LaxResolvent res(u, kappa);
    alpha[i] = integral(density_from_diagonal(u, res.diagonal(), kappa.value()));
    forcing[i] = integral(res.drho(coefficient_terms(u, traj.times[i], coeffs)));
  }
  // Composite Simpson on an even number of intervals; a trailing interval uses the
  // three-point end correction.
  double total = 0.0;
  const std::size_t intervals = n - 1;
  const std::size_t even = intervals - intervals % 2;
  for (std::size_t i = 0; i + 2 <= even; i += 2) total += h / 3.0 * (forcing[i] + 4.0 * forcing[i + 1] + forcing[i + 2]);
  if (even < intervals)
    total += h / 12.0 * (-forcing[n - 3] + 8.0 * forcing[n - 2] + 5.0 * forcing[n - 1]);
  const double change = alpha.back() - alpha.front();
  return {change, total, std::abs(change - total) / std::max(alpha.front(), 1e-10)};
}

} // namespace kdvlab
