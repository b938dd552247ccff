#include "kdvlab/dynamics.hpp"
#include "kdvlab/initial_data.hpp"
#include "kdvlab/smoothing.hpp"
#include "kdvlab/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace kdvlab;
using kdvlab::testing::error_code;
using kdvlab::testing::max_diff;

namespace {

Trajectory frozen(const RealField& u, double T, int steps) {
  Trajectory traj(u.grid);
  for (int i = 0; i <= steps; ++i) {
    traj.times.push_back(-T + 2.0 * T * i / steps);
    traj.snapshots.push_back(u);
  }
  return traj;
}

Trajectory truncate(const Trajectory& t, std::size_t n) {
  Trajectory out(t.grid);
  out.times.assign(t.times.begin(), t.times.begin() + static_cast<long>(n));
  out.snapshots.assign(t.snapshots.begin(), t.snapshots.begin() + static_cast<long>(n));
  out.records.assign(t.records.begin(), t.records.begin() + static_cast<long>(std::min(n, t.records.size())));
  out.kappas = t.kappas;
  out.dt = t.dt;
  return out;
}

RealField constant(const TorusGrid& g, double c) {
  return sample(g, [c](double) { return c; });
}

} // namespace

TEST_CASE("weight family") {
  const TorusGrid g(60, 256);
  const WeightFamily w(g);
  CHECK(w.centers().size() == 64);
  for (double c : {0.0, 7.5, -21.3}) {
    const RealField psi = w.psi(c);
    CHECK(max_diff(w.phi_prime(c), pointwise(psi, psi)) <= 1e-10);
    // phi minus its ramp is periodic, and differentiating it spectrally recovers psi^2.
    const double m = pointwise(psi, psi).samples.mean();
    const RealField ramp = sample(g, [&](double x) {
      const double d = x - c;
      return m * (d - g.length() * std::floor((d + 0.5 * g.length()) / g.length()));
    });
    const RealField per = w.phi(c) - ramp;
    CHECK(max_diff(derivative(per, 1) + constant(g, m), pointwise(psi, psi)) <= 1e-8);
  }
  // Near its center phi follows 6 tanh((x - x0)/6) up to wrap-around.
  const RealField phi = w.phi(0.0);
  CHECK(std::abs(phi[128 + 10] - 6.0 * std::tanh(g.x(138) / 6.0)) <= 0.1);
  CHECK(phi[128] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("local smoothing norm") {
  const TorusGrid g(12 * M_PI, 256);
  const KappaParam k(2);
  const WeightFamily all(g);
  CHECK(ls_norm(frozen(RealField(g), 0.5, 10), k, all) == 0.0);

  const RealField c = sample(g, [](double x) { return std::cos(x); });
  const WeightFamily one(g, std::vector<double>{0.0});
  const double direct = sobolev_kappa_norm(pointwise(one.psi(0.0), derivative(c, 1)), -1.0, k);
  const double T = 0.5;
  CHECK(ls_norm(frozen(c, T, 10), k, one) == doctest::Approx(std::sqrt(2 * T) * direct).epsilon(1e-12));
  CHECK(ls_norm(frozen(c, T, 10), k, all) >= std::sqrt(2 * T) * direct * (1 - 1e-12));
  CHECK(ls_norm(frozen(c, 2 * T, 20), k, all) == doctest::Approx(std::sqrt(2.0) * ls_norm(frozen(c, T, 10), k, all)).epsilon(1e-12));

  Trajectory empty(g);
  CHECK(error_code([&] { ls_norm(empty, k, all); }) == ErrorCode::EmptyTrajectory);
  CHECK(error_code([&] { ls_norm(frozen(c, T, 4), k, WeightFamily(TorusGrid(10, 64))); }) == ErrorCode::GridMismatch);
}

TEST_CASE("local mass") {
  const TorusGrid g(50, 256);
  CHECK(local_mass(frozen(RealField(g), 0.5, 10)) == 0.0);
  CHECK(local_mass(frozen(constant(g, 1.0), 0.5, 10)) == doctest::Approx(2.0).epsilon(1e-12));
  // u = -2 sech^2(x): int_{-1}^{1} 4 sech^4 = 8 (tanh(1) - tanh(1)^3 / 3).
  const double t1 = std::tanh(1.0);
  const Trajectory one = frozen(soliton(g, 1.0), 0.0, 0);
  CHECK(local_mass(one, 1) == doctest::Approx(8.0 * (t1 - t1 * t1 * t1 / 3.0)).epsilon(1e-10));
}

TEST_CASE("monotone under truncation and translation invariant") {
  const TorusGrid g(50, 256);
  const CoefficientSet none(g);
  SolveOptions opts;
  opts.dt = 1e-3;
  opts.save_every = 10;
  opts.kappas = {2};
  const Trajectory traj = solve(soliton(g, 1.0, -5.0), 1.0, none, opts);
  const KappaParam k(2);
  const WeightFamily w(g);
  double prev_ls = 0.0, prev_mass = 0.0;
  for (std::size_t n : {11, 31, 61, 101}) {
    const Trajectory part = truncate(traj, n);
    const double ls = ls_norm(part, k, w);
    const double m = local_mass(part);
    CHECK(ls >= prev_ls);
    CHECK(m >= prev_mass);
    prev_ls = ls;
    prev_mass = m;
  }
  Trajectory moved = traj;
  for (auto& s : moved.snapshots) s = translate(s, 2.5 * g.dx());
  CHECK(std::abs(ls_norm(moved, k, w) / ls_norm(traj, k, w) - 1.0) <= 0.02);
  for (const auto& r : traj.records) {
    const double a = r.alpha[0], h = r.h1k_norm[0] * r.h1k_norm[0];
    CHECK(h <= 4 * 2 * a * (1 + 1e-9));
    CHECK(4 * 2 * a <= 4 * h * (1 + 1e-9));
  }
}

TEST_CASE("coefficient hypotheses") {
  const TorusGrid g(50, 256);
  const RealField zero(g);
  const HypothesisReport none = hypothesis_check(CoefficientSet(g), HypothesisMode::Integral);
  for (const auto& c : none.coeffs) CHECK(c.value == 0.0);
  const HypothesisReport none_p = hypothesis_check(CoefficientSet(g), HypothesisMode::Pointwise);
  for (const auto& c : none_p.coeffs) CHECK(c.value == 0.0);

  auto bump = [&](double d0) { return sample(g, [d0](double x) { return d0 / (1 + x * x); }); };
  const CoefficientSet a2 = CoefficientSet::from_fields(zero, bump(0.01), zero, zero);
  const HypothesisReport p = hypothesis_check(a2, HypothesisMode::Pointwise);
  CHECK(p.coeffs[1].alternative == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p.coeffs[1].value >= p.coeffs[1].alternative);
  CHECK(p.coeffs[1].value <= 2.0 * 0.01);
  CHECK(p.coeffs[1].decaying);
  const double i1 = hypothesis_check(a2, HypothesisMode::Integral).coeffs[1].value;
  const double i2 = hypothesis_check(CoefficientSet::from_fields(zero, bump(0.02), zero, zero), HypothesisMode::Integral).coeffs[1].value;
  CHECK(std::isfinite(i1));
  CHECK(i2 == doctest::Approx(2.0 * i1).epsilon(1e-12));

  const CoefficientSet a3 = CoefficientSet::from_fields(zero, zero, constant(g, 1.0), zero);
  CHECK_FALSE(hypothesis_check(a3, HypothesisMode::Pointwise).coeffs[2].decaying);
  CHECK_FALSE(hypothesis_check(a3, HypothesisMode::Integral).coeffs[2].decaying);
}

TEST_CASE("bootstrap audit") {
  const TorusGrid g(50, 256);
  const CoefficientSet none(g);
  const KappaParam k(3);
  const WeightFamily w(g);
  SolveOptions opts;
  opts.dt = 1e-3;
  opts.save_every = 10;
  opts.kappas = {3};
  const BootstrapRecord z = bootstrap_audit(solve(RealField(g), 0.2, none, opts), k, 0.0, 0.0, w);
  CHECK(z.B_T == 0.0);
  CHECK_FALSE(z.fitted);

  const RealField u0 = random_bandlimited(g, KappaParam(1), 0.5, 11);
  const Trajectory traj = solve(u0, 0.2, none, opts);
  const double R = sobolev_kappa_norm(u0, -1.0, KappaParam(1));
  const BootstrapRecord full = bootstrap_audit(traj, k, R, 0.0, w);
  CHECK(full.admissible);
  CHECK(full.fitted);
  CHECK(full.B_T == doctest::Approx(full.sup_H1k + full.ls_sq / 4).epsilon(1e-14));
  CHECK(std::isfinite(full.fitted_C));
  const BootstrapRecord half = bootstrap_audit(truncate(traj, traj.size() / 2 + 1), k, R, 0.0, w);
  CHECK(half.B_T <= full.B_T);

  const Horizon never = bootstrap_horizon(traj, k, w, 1e9);
  CHECK_FALSE(never.reached);
  const Horizon at_once = bootstrap_horizon(traj, k, w, 0.0);
  CHECK(at_once.reached);
  CHECK(at_once.time == traj.times.front());

  const RealField big = gaussian(g, 5.0, 1.0);
  const BootstrapRecord flagged = bootstrap_audit(frozen(big, 0.1, 4), KappaParam(1), 1.0, 0.0, w);
  CHECK_FALSE(flagged.admissible);
  CHECK_FALSE(flagged.fitted);
}
