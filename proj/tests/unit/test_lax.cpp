#include "kdvlab/initial_data.hpp"
#include "kdvlab/lax.hpp"
#include "kdvlab/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace kdvlab;
using kdvlab::testing::error_code;
using kdvlab::testing::max_diff;

namespace {

RealField constant(const TorusGrid& g, double c) {
  return sample(g, [c](double) { return c; });
}

double l2(const RealField& f) { return l2_norm(f); }

} // namespace

TEST_CASE("free kernel at zero potential") {
  const TorusGrid g(50, 512);
  const DenseOperator k = build_lax_resolvent(RealField(g), KappaParam(1));
  double err = 0.0;
  for (std::size_t i = 0; i < g.points(); i += 7)
    for (std::size_t j = 0; j < g.points(); ++j)
      err = std::max(err, std::abs(k.kernel(i, j) - periodized_free_kernel(g.x(i) - g.x(j), 1.0, 50.0)));
  CHECK(err <= 1e-6);
  // The periodized kernel differs from the line kernel only by wrap-around.
  CHECK(periodized_free_kernel(3.0, 1.0, 50.0) == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("raw collocation kernel off the diagonal") {
  const TorusGrid g(50, 512);
  const LaxResolvent res(RealField(g), KappaParam(1));
  const Eigen::MatrixXd& kc = res.collocation_kernel();
  double err = 0.0;
  for (std::size_t j = 8; j + 8 < g.points(); ++j)
    err = std::max(err, std::abs(kc(0, static_cast<Eigen::Index>(j)) - periodized_free_kernel(g.x(0) - g.x(j), 1.0, 50.0)));
  CHECK(err < 1e-4);
}

TEST_CASE("constant potentials") {
  const TorusGrid g(50, 512);
  const RealField g3 = greens_diagonal_direct(constant(g, 3.0), KappaParam(1));
  CHECK(max_diff(g3, constant(g, 0.25)) <= 1e-6);
  const RealField g0 = greens_diagonal_direct(RealField(g), KappaParam(2));
  CHECK(max_diff(g0, constant(g, 0.25)) <= 1e-8);
  const RealField g1 = greens_diagonal_direct(constant(g, 1.0), KappaParam(2));
  CHECK(max_diff(g1, constant(g, 1.0 / (2.0 * std::sqrt(5.0)))) <= 1e-6);
  // The u = 1, kappa = 2 value is already resolved on a coarse grid.
  const TorusGrid coarse(50, 128);
  CHECK(max_diff(greens_diagonal_direct(constant(coarse, 1.0), KappaParam(2)), constant(coarse, 1.0 / (2.0 * std::sqrt(5.0)))) <= 1e-6);
}

TEST_CASE("singular and indefinite operators") {
  const TorusGrid g(50, 256);
  const double xi1 = 2.0 * M_PI / 50.0;
  // -d^2 + u + kappa^2 has the exact zero mode cos(xi1 x).
  CHECK(error_code([&] { LaxResolvent(constant(g, -1.0 - xi1 * xi1), KappaParam(1)); }) == ErrorCode::NearSingularOperator);
}

TEST_CASE("series expansion") {
  const TorusGrid g(50, 256);
  const SeriesResult zero = greens_diagonal_series(RealField(g), KappaParam(2));
  CHECK(max_diff(zero.g, constant(g, 0.25)) < 1e-12);
  CHECK(zero.terms_used == 1);
  const SeriesResult one = greens_diagonal_series(constant(g, 1.0), KappaParam(2), SeriesOptions{40, 1e-10, 0.5});
  CHECK(max_diff(one.g, constant(g, 1.0 / (2.0 * std::sqrt(5.0)))) <= 1e-8);

  const RealField sol = soliton(g, 1.0);
  const SeriesResult s = greens_diagonal_series(sol, KappaParam(3));
  CHECK(max_diff(s.g, greens_diagonal_direct(sol, KappaParam(3))) <= 1e-8);

  // Scale a bump so the contraction bound is 0.9.
  RealField bump = gaussian(g, 1.0, 1.0);
  bump *= 0.9 / series_contraction_bound(bump, KappaParam(1));
  CHECK(series_contraction_bound(bump, KappaParam(1)) == doctest::Approx(0.9));
  CHECK(error_code([&] { greens_diagonal_series(bump, KappaParam(1)); }) == ErrorCode::SeriesNotContracting);
}

TEST_CASE("series agrees with direct across the contraction regime") {
  const TorusGrid g(50, 256);
  std::mt19937_64 rng(21);
  int tested = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const KappaParam k(1.0 + trial % 4);
    const RealField u = random_bandlimited(g, k, 0.2 + 0.05 * trial, rng());
    if (series_contraction_bound(u, k) > 0.5) continue;
    ++tested;
    CHECK(max_diff(greens_diagonal_series(u, k).g, greens_diagonal_direct(u, k)) <= 1e-8);
  }
  CHECK(tested >= 6);
}

TEST_CASE("first order term") {
  const TorusGrid g(2 * M_PI, 32);
  CHECK(max_diff(h1_field(constant(g, 1.0), KappaParam(1)), constant(g, -0.25)) < 1e-14);
  const RealField c = sample(g, [](double x) { return std::cos(x); });
  CHECK(max_diff(h1_field(c, KappaParam(1)), -0.2 * c) < 1e-14);

  const TorusGrid big(50, 256);
  const RealField u = random_bandlimited(big, KappaParam(1), 0.5, 4);
  // Against the exact torus first-order diagonal: only wrap-around separates them.
  CHECK(max_diff(h1_field(u, KappaParam(1)), first_order_exact(u, 1.0)) <= 1e-9);
  // Against the raw collocation diagonal -dx sum_j K0(i,j)^2 u_j the kink of K0 costs accuracy.
  const DenseOperator k0 = collocation_free_resolvent(big, 1.0);
  RealField raw(big);
  for (std::size_t i = 0; i < big.points(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < big.points(); ++j) acc += k0.kernel(i, j) * k0.kernel(i, j) * u[j];
    raw[i] = -acc * big.dx();
  }
  CHECK(max_diff(h1_field(u, KappaParam(1)), raw) <= 1e-4);
}

TEST_CASE("density and alpha closed forms") {
  const TorusGrid g(50, 512);
  const GreensData z = rho_alpha(RealField(g), KappaParam(2));
  CHECK(z.rho.max_abs() < 1e-12);
  CHECK(std::abs(z.alpha) < 1e-10);
  const GreensData d = rho_alpha(constant(g, 1.0), KappaParam(2));
  const double rho = 2.25 - std::sqrt(5.0);
  CHECK(max_diff(d.rho, constant(g, rho)) <= 1e-6);
  CHECK(d.alpha == doctest::Approx(50 * rho).epsilon(1e-6));
  const GreensData d3 = rho_alpha(constant(g, 3.0), KappaParam(2));
  CHECK(max_diff(d3.g, constant(g, 1.0 / (2.0 * std::sqrt(7.0)))) <= 1e-6);
  CHECK(max_diff(d3.rho, constant(g, 2.0 + 0.75 - std::sqrt(7.0))) <= 1e-6);
}

TEST_CASE("alpha two-sided bound on random data") {
  const TorusGrid g(50, 256);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> target(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = target(rng);
    const KappaParam k(1.0 + 10.0 * t * t);
    const RealField u = random_bandlimited(g, k, t, rng());
    const double h = sobolev_kappa_norm_squared(u, -1.0, k);
    const GreensData d = rho_alpha(u, k);
    CHECK(h / (4 * k) <= d.alpha + 1e-9);
    CHECK(d.alpha <= h / k + 1e-9);
    CHECK(d.g.samples.minCoeff() > 0.0);
    CHECK(d.rho.samples.minCoeff() >= -1e-9);
  }
}

TEST_CASE("current j") {
  const TorusGrid g(50, 512);
  const RealField zero(g);
  CHECK(current_j(zero, KappaParam(2), greens_diagonal_direct(zero, KappaParam(2))).max_abs() < 1e-10);
  const RealField one = constant(g, 1.0);
  const RealField j = current_j(one, KappaParam(2), greens_diagonal_direct(one, KappaParam(2)));
  CHECK(max_diff(j, constant(g, 32.0 - 14.0 * std::sqrt(5.0) - 0.75)) <= 1e-5);
  const RealField sol = soliton(g, 1.0);
  const RealField js = current_j(sol, KappaParam(3), greens_diagonal_direct(sol, KappaParam(3)));
  CHECK(std::abs(js[0]) <= 1e-8);
  CHECK(js.max_abs() > 1e-3);
}

TEST_CASE("directional derivatives") {
  const TorusGrid g(50, 256);
  const RealField zero(g);
  const RealField one = constant(g, 1.0);
  CHECK(max_diff(dg_directional(zero, KappaParam(1), one), constant(g, -0.25)) < 1e-9);
  const RealField u = gaussian(g, 0.5, 1.0);
  CHECK(dg_directional(u, KappaParam(2), zero).max_abs() == 0.0);

  const RealField f = gaussian(g, 1.0, 2.0, 1.0);
  const double s = 1e-5;
  const KappaParam k(2);
  const RealField fd_g = (1.0 / (2 * s)) * (greens_diagonal_direct(u + s * f, k) - greens_diagonal_direct(u - s * f, k));
  const RealField dg = dg_directional(u, k, f);
  CHECK(l2(fd_g - dg) <= 1e-6 * l2(dg));

  const RealField fd_rho = (1.0 / (2 * s)) * (rho_alpha(u + s * f, k).rho - rho_alpha(u - s * f, k).rho);
  const RealField dr = drho_directional(u, k, f);
  CHECK(l2(fd_rho - dr) <= 1e-6 * l2(dr));

  CHECK(drho_directional(zero, KappaParam(1), f).max_abs() <= 1e-9);
  const RealField f2 = sample(g, [](double x) { return std::sin(x) / (1 + x * x); });
  const RealField lhs = drho_directional(u, k, f + f2);
  const RealField rhs = drho_directional(u, k, f) + drho_directional(u, k, f2);
  CHECK(max_diff(lhs, rhs) <= 1e-12);
}

TEST_CASE("resolvent plumbing identities") {
  const TorusGrid g(50, 512);
  const RealField u = gaussian(g, 0.5, 1.0);
  const KappaParam k(3);
  const LaxResolvent res(u, k);
  const DenseOperator kern = res.kernel();
  CHECK((kern.kernel - kern.kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-8);

  // R_u - R_0 = -R_0 u R_u for the collocation operators.
  const Eigen::MatrixXd& ku = res.collocation_kernel();
  const Eigen::MatrixXd k0 = collocation_free_resolvent(g, 3.0).kernel;
  const Eigen::MatrixXd lhs = ku - k0;
  const Eigen::MatrixXd rhs = -g.dx() * k0 * u.samples.asDiagonal() * ku;
  CHECK((lhs - rhs).norm() <= 1e-8 * lhs.norm());

  // int G(x,y) G(y,x) / (2 g(y)^2) dy = g(x).
  RealField w = res.diagonal();
  w.samples = (0.5 * w.samples.array().square().inverse()).matrix();
  const RealField back = -1.0 * res.dg(w);
  CHECK(max_diff(back, res.diagonal()) <= 1e-7 * res.diagonal().max_abs());
}

TEST_CASE("second order diagonal identity") {
  const TorusGrid g(50, 1024);
  const RealField u = gaussian(g, 0.5, 1.0);
  const double kappa = 3.0;
  const KappaParam k(kappa);
  const Eigen::MatrixXd k0 = collocation_free_resolvent(g, kappa).kernel;
  const double dx = g.dx();
  const Eigen::MatrixXd m = (k0 * u.samples.asDiagonal()) * (k0 * u.samples.asDiagonal()) * k0 * (dx * dx);
  RealField h2(g, m.diagonal());
  const RealField h1 = h1_field(u, k);
  const RealField d1 = derivative(h1, 1);
  const RealField d2 = derivative(h1, 2);
  const RealField h1sq = dealiased_product(h1, h1);
  const RealField d1sq = dealiased_product(d1, d1);
  const RealField inner = apply_resolvent_multiplier(d1sq + 2.0 * derivative(h1sq, 2), 2 * kappa);
  const double k2 = kappa * kappa, k4 = k2 * k2;
  const RealField rhs = 3.0 * dealiased_product(u, u) - 3.0 * k2 * dealiased_product(d2, d2) -
                        20.0 * k4 * (d1sq - derivative(h1sq, 2)) + 4.0 * k4 * derivative(inner, 2);
  const double scale = u.samples.squaredNorm() * dx;
  CHECK(l2(16.0 * std::pow(kappa, 5) * h2 - rhs) <= 1e-6 * scale);
}

TEST_CASE("microscopic conservation law") {
  const TorusGrid g(50, 512);
  const CoefficientSet none(g);
  CHECK(microlaw_residual(RealField(g), KappaParam(3), none, 0.0) <= 1e-10);
  const RealField u = gaussian(g, 0.5, 1.0);
  const double r512 = microlaw_residual(u, KappaParam(3), none, 0.0);
  CHECK(r512 <= 1e-6);
  const RealField a = gaussian(g, 0.3, 2.0);
  const CoefficientSet some = CoefficientSet::from_fields(a, 0.5 * a, a, 2.0 * a);
  CHECK(std::abs(microlaw_residual(u, KappaParam(3), some, 0.0) - r512) <= 1e-12);
  const TorusGrid fine(50, 1024);
  CHECK(microlaw_residual(gaussian(fine, 0.5, 1.0), KappaParam(3), CoefficientSet(fine), 0.0) <= 0.5 * r512);
}
