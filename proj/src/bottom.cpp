#include "kdvlab/bottom.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kdvlab {

namespace {

// Periodic antiderivative of a zero-mean field.
RealField periodic_antiderivative(const RealField& f) {
  Spectrum s = forward(f);
  const std::size_t nyq = f.size() / 2;
  s.bins[0] = 0.0;
  s.bins[nyq] = 0.0;
  for (std::size_t k = 1; k < nyq; ++k) s.bins[k] /= Complex(0.0, f.grid.xi_half(k));
  return inverse(s);
}

RealField power(const RealField& f, double p) {
  return RealField(f.grid, f.samples.array().pow(p).matrix());
}

RealField times(const RealField& a, const RealField& b) { return pointwise(a, b); }

TransformResult finish(RealField f) {
  const double oob = out_of_band_fraction(f);
  return {std::move(f), oob, oob > 1e-6};
}

} // namespace

BottomProfile::BottomProfile(const RealField& c, double margin)
    : c_(c), margin_(margin), b_(c.grid), b1_(c.grid), b2_(c.grid), b3_(c.grid), slope_(1.0), y_grid_(c.grid),
      periodic_(c.grid), y_samples_(c.grid), y_prime_samples_(c.grid) {
  if (!c.all_finite()) throw Error(ErrorCode::NonFiniteInput, "bottom profile has non-finite samples");
  if (!(margin > 0.0) || margin >= 1.0) throw Error(ErrorCode::InvalidArgument, "bottom margin must lie in (0, 1)");
  const double depth = 1.0 - c.samples.maxCoeff();
  if (depth < margin)
    throw Error(ErrorCode::BottomTooShallow,
                "1 - c reaches " + std::to_string(depth) + ", below the margin " + std::to_string(margin));
  const auto& grid = c.grid;
  b_ = RealField(grid, (1.0 - c.samples.array()).sqrt().matrix());
  b1_ = derivative(b_, 1);
  b2_ = derivative(b_, 2);
  b3_ = derivative(b_, 3);

  y_prime_samples_ = power(b_, -5.0 / 3.0);
  slope_ = y_prime_samples_.samples.mean();
  RealField fluct = y_prime_samples_;
  fluct.samples.array() -= slope_;
  periodic_ = periodic_antiderivative(fluct);
  periodic_.samples.array() -= TrigInterpolant(periodic_)(0.0);
  periodic_interp_.emplace(periodic_);
  y_grid_ = TorusGrid(slope_ * grid.length(), grid.points());
  for (std::size_t i = 0; i < grid.points(); ++i) y_samples_[i] = slope_ * grid.x(i) + periodic_[i];
}

const RealField& BottomProfile::db(int order) const {
  switch (order) {
    case 1: return b1_;
    case 2: return b2_;
    case 3: return b3_;
    default: throw Error(ErrorCode::InvalidArgument, "b derivatives are available for orders 1..3");
  }
}

double BottomProfile::y(double x) const { return slope_ * x + (*periodic_interp_)(x); }

double BottomProfile::y_prime(double x) const { return slope_ + periodic_interp_->derivative(x); }

double BottomProfile::y_inverse(double target) const {
  const TrigInterpolant& p = *periodic_interp_;
  double x = target / slope_;
  for (int it = 0; it < 60; ++it) {
    const double f = slope_ * x + p(x) - target;
    const double fp = slope_ + p.derivative(x);
    const double dx = f / fp;
    x -= dx;
    if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) return x;
  }
  throw Error(ErrorCode::NoConvergence, "inverse of the y map did not converge at y = " + std::to_string(target));
}

BottomProfile build_profile(const RealField& c, double margin) { return BottomProfile(c, margin); }

SynthesizedCoefficients synth_fields(const BottomProfile& profile) {
  const RealField& b = profile.b();
  const RealField& b1 = profile.db(1);
  const RealField& b2 = profile.db(2);
  const RealField& b3 = profile.db(3);
  const auto bp = [&](double p) { return power(b, p); };

  RealField f2 = times(bp(2.0 / 3.0), b1) * 10.0;
  RealField f3 = times(bp(4.0 / 3.0), times(b1, b1)) * (5.0 / 9.0) - times(bp(7.0 / 3.0), b2) * (10.0 / 3.0);
  f3.samples.array() += 4.0 * (1.0 - b.samples.array().pow(-2.0 / 3.0));
  RealField f4 = times(bp(2.0), times(b1, times(b1, b1))) * (10.0 / 27.0) -
                 times(bp(3.0), times(b1, b2)) * (10.0 / 3.0) - times(bp(4.0), b3) * (5.0 / 3.0) - b1 * (38.0 / 3.0);

  const TorusGrid& yg = profile.y_grid();
  const TrigInterpolant i2(f2), i3(f3), i4(f4);
  SynthesizedCoefficients out{RealField(yg), RealField(yg), RealField(yg)};
  for (std::size_t k = 0; k < yg.points(); ++k) {
    const double x = profile.y_inverse(yg.x(k));
    out.a2[k] = i2(x);
    out.a3[k] = i3(x);
    out.a4[k] = i4(x);
  }
  return out;
}

CoefficientSet synth_coefficients(const BottomProfile& profile) {
  const SynthesizedCoefficients f = synth_fields(profile);
  CoefficientMetadata meta;
  meta.descriptor = "bottom";
  meta.decay_constant = profile.c().max_abs();
  meta.time_independent = false;
  // The frame y(x) - 4t drifts, so a_j(t, y) = a_j(0, y + 4t).
  auto drifting = [](const RealField& a) -> FieldSampler {
    if (a.max_abs() == 0.0) return nullptr;
    return [a](double t) { return t == 0.0 ? a : translate(a, -4.0 * t); };
  };
  return CoefficientSet(profile.y_grid(), {nullptr, drifting(f.a2), drifting(f.a3), drifting(f.a4)}, meta);
}

TransformResult transform_forward(const RealField& v, double t, const BottomProfile& profile) {
  if (v.grid != profile.y_grid()) throw Error(ErrorCode::GridMismatch, "transform_forward expects a y-grid field");
  const TorusGrid& xg = profile.x_grid();
  const TrigInterpolant iv(v);
  RealField u(xg);
  for (std::size_t i = 0; i < xg.points(); ++i)
    u[i] = std::pow(profile.b()[i], 5.0 / 3.0) * iv(profile.y_map()[i] - 4.0 * t);
  return finish(std::move(u));
}

TransformResult transform_backward(const RealField& u, double t, const BottomProfile& profile) {
  if (u.grid != profile.x_grid()) throw Error(ErrorCode::GridMismatch, "transform_backward expects an x-grid field");
  const TorusGrid& yg = profile.y_grid();
  const TrigInterpolant iu(u);
  const TrigInterpolant ib(power(profile.b(), -5.0 / 3.0));
  RealField v(yg);
  for (std::size_t k = 0; k < yg.points(); ++k) {
    const double x = profile.y_inverse(yg.x(k) + 4.0 * t);
    v[k] = ib(x) * iu(x);
  }
  return finish(std::move(v));
}

RealField kdvvb_rhs(const RealField& u, const BottomProfile& profile) {
  if (u.grid != profile.x_grid()) throw Error(ErrorCode::GridMismatch, "variable-bottom field on the wrong grid");
  const RealField b5 = power(profile.b(), 5.0);
  RealField out = dealiased_product(b5, derivative(u, 3)) * -1.0;
  out += derivative(dealiased_product(u, u), 1) * 3.0;
  out -= dealiased_product(profile.b(), derivative(u, 1)) * 4.0;
  out -= dealiased_product(profile.db(1), u) * 6.0;
  return out;
}

Trajectory solve_kdvvb(const RealField& u0, double T, const BottomProfile& profile, const SolveOptions& opts) {
  if (u0.grid != profile.x_grid()) throw Error(ErrorCode::GridMismatch, "variable-bottom data on the wrong grid");
  RealField b5 = power(profile.b(), 5.0);
  const double frozen = b5.samples.maxCoeff();
  b5.samples.array() -= frozen;
  const RealField b = profile.b();
  const RealField b1 = profile.db(1);
  NonlinearTerm nonlinear = [b5, b, b1](const RealField& u, double) {
    if (!u.all_finite()) throw Error(ErrorCode::Diverged, "non-finite field inside a time step");
    RealField out = dealiased_product(b5, derivative(u, 3)) * -1.0;
    out += derivative(dealiased_product(u, u), 1) * 3.0;
    out -= dealiased_product(b, derivative(u, 1)) * 4.0;
    out -= dealiased_product(b1, u) * 6.0;
    return out;
  };
  Trajectory traj = integrate(u0, T, frozen, nonlinear, opts);
  traj.coeff_descriptor = "variable_bottom";
  return traj;
}

RealField sech2_bottom(const TorusGrid& grid, double amplitude, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bottom width must be positive");
  return sample(grid, [&](double x) {
    const double s = 1.0 / std::cosh(x / width);
    return amplitude * s * s;
  });
}

} // namespace kdvlab
