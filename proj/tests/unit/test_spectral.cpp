#include "kdvlab/fft.hpp"
#include "kdvlab/initial_data.hpp"
#include "kdvlab/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace kdvlab;
using kdvlab::testing::error_code;
using kdvlab::testing::max_diff;

TEST_CASE("grid spacing and wavenumber layout") {
  const TorusGrid g(2 * M_PI, 8);
  CHECK(g.dx() == doctest::Approx(M_PI / 4));
  const std::vector<double> expect{0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) CHECK(g.wavenumbers()[i] == doctest::Approx(expect[i]));
  CHECK(g.x(0) == doctest::Approx(-M_PI));
  CHECK(TorusGrid(50, 512).dx() == 50.0 / 512);
}

TEST_CASE("grid rejects bad sizes") {
  CHECK(error_code([] { TorusGrid(2 * M_PI, 7); }) == ErrorCode::OddPointCount);
  CHECK(error_code([] { TorusGrid(0.0, 8); }) == ErrorCode::NonPositiveLength);
  CHECK(error_code([] { TorusGrid(-1.0, 8); }) == ErrorCode::NonPositiveLength);
  CHECK(error_code([] { KappaParam(0.5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("spectral derivatives of band-limited fields") {
  const TorusGrid g(2 * M_PI, 32);
  const RealField s = sample(g, [](double x) { return std::sin(x); });
  const RealField c = sample(g, [](double x) { return std::cos(x); });
  CHECK(max_diff(derivative(s, 1), c) < 1e-10);
  CHECK(max_diff(derivative(s, 3), -1.0 * c) < 1e-10);
  const RealField one = sample(g, [](double) { return 1.0; });
  for (int order : {1, 2, 3}) CHECK(derivative(one, order).max_abs() < 1e-12);
}

TEST_CASE("odd derivatives drop the Nyquist mode") {
  const TorusGrid g(2 * M_PI, 16);
  const RealField nyq = sample(g, [](double x) { return std::cos(8 * x); });
  CHECK(derivative(nyq, 1).max_abs() < 1e-12);
  CHECK(derivative(nyq, 2).max_abs() == doctest::Approx(64.0));
}

TEST_CASE("free resolvent examples") {
  const TorusGrid g(2 * M_PI, 32);
  const RealField one = sample(g, [](double) { return 1.0; });
  CHECK(max_diff(apply_free_resolvent(one, KappaParam(2)), 0.25 * one) < 1e-14);
  const RealField c = sample(g, [](double x) { return std::cos(x); });
  CHECK(max_diff(apply_free_resolvent(c, KappaParam(1)), 0.5 * c) < 1e-14);
}

TEST_CASE("free resolvent inverts the forward operator") {
  const TorusGrid g(50, 256);
  const RealField f = random_bandlimited(g, KappaParam(3), 1.0, 11);
  const RealField r = apply_free_resolvent(f, KappaParam(3));
  const RealField back = -1.0 * derivative(r, 2) + 9.0 * r;
  CHECK(kdvlab::testing::rel_l2(back, f) < 1e-12);
}

TEST_CASE("sobolev norm examples") {
  const TorusGrid g(2 * M_PI, 32);
  CHECK(sobolev_kappa_norm(RealField(g), -1, KappaParam(1)) == 0.0);
  const RealField c = sample(g, [](double x) { return std::cos(x); });
  CHECK(sobolev_kappa_norm(c, -1, KappaParam(1)) == doctest::Approx(std::sqrt(M_PI / 5)).epsilon(1e-13));
  const RealField f = gaussian(TorusGrid(50, 256), 0.7, 1.3, 2.0);
  CHECK(sobolev_kappa_norm(f, 0, KappaParam(2)) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("Parseval and monotonicity in s") {
  const TorusGrid g(50, 256);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RealField f = random_bandlimited(g, KappaParam(1), 1.0, seed);
    const double physical = std::sqrt(f.samples.squaredNorm() * g.dx());
    CHECK(sobolev_kappa_norm(f, 0.0, KappaParam(1)) == doctest::Approx(physical).epsilon(1e-12));
    double prev = 0.0;
    for (double s : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double v = sobolev_kappa_norm(f, s, KappaParam(1.5));
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("duality bound between H^-1 and H^1") {
  const TorusGrid g(50, 256);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RealField f = random_bandlimited(g, KappaParam(1), 1.0, rng());
    const RealField h = random_bandlimited(g, KappaParam(2), 1.0, rng());
    const KappaParam k(1.0 + trial * 0.3);
    CHECK(std::abs(inner_product(f, h)) <= sobolev_kappa_norm(f, -1, k) * sobolev_kappa_norm(h, 1, k) * (1 + 1e-12));
  }
}

TEST_CASE("L-infinity embedding ratio") {
  const TorusGrid g(50, 512);
  const RealField bump = sample(g, [](double x) { return 1.0 / std::cosh(x); });
  CHECK(linf_embedding_ratio(bump, KappaParam(1)) <= 0.5 + 1e-6);
  CHECK(error_code([&] { linf_embedding_ratio(RealField(g), KappaParam(1)); }) == ErrorCode::DivisionByZeroNorm);
  const TorusGrid g2(2 * M_PI, 32);
  const RealField c = sample(g2, [](double x) { return std::cos(x); });
  double prev = 1e300;
  for (double k : {1.0, 2.0, 4.0}) {
    const double r = linf_embedding_ratio(c, KappaParam(k));
    CHECK(std::isfinite(r));
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("dealiased product is exact for low modes") {
  const TorusGrid g(2 * M_PI, 32);
  const RealField a = sample(g, [](double x) { return std::cos(3 * x); });
  const RealField b = sample(g, [](double x) { return std::sin(4 * x); });
  const RealField ab = sample(g, [](double x) { return std::cos(3 * x) * std::sin(4 * x); });
  CHECK(max_diff(dealiased_product(a, b), ab) < 1e-13);
  // 12 + 10 = 22 > 16 aliases onto mode 10 without padding; the padded product drops it.
  const RealField hi = sample(g, [](double x) { return std::cos(12 * x); });
  const RealField hi2 = sample(g, [](double x) { return std::cos(10 * x); });
  const RealField p = dealiased_product(hi, hi2);
  const RealField expect = sample(g, [](double x) { return 0.5 * std::cos(2 * x); });
  CHECK(max_diff(p, expect) < 1e-13);
}

TEST_CASE("translation and interpolation") {
  const TorusGrid g(2 * M_PI, 32);
  const RealField f = sample(g, [](double x) { return std::sin(2 * x) + 0.3 * std::cos(5 * x); });
  const RealField t = translate(f, 0.7);
  const RealField expect = sample(g, [](double x) { return std::sin(2 * (x - 0.7)) + 0.3 * std::cos(5 * (x - 0.7)); });
  CHECK(max_diff(t, expect) < 1e-13);
  const TrigInterpolant interp(f);
  for (double x : {-3.0, -0.1, 0.4, 2.9})
    CHECK(interp(x) == doctest::Approx(std::sin(2 * x) + 0.3 * std::cos(5 * x)).epsilon(1e-12));
  CHECK(interp.derivative(0.4) == doctest::Approx(2 * std::cos(0.8) - 1.5 * std::sin(2.0)).epsilon(1e-12));
}

TEST_CASE("resample round trip and band fraction") {
  const TorusGrid g(50, 128);
  const RealField f = random_bandlimited(g, KappaParam(1), 1.0, 3);
  const RealField up = resample(f, 256);
  CHECK(max_diff(resample(up, 128), f) < 1e-13);
  CHECK(out_of_band_fraction(f) < 1e-20);
  const RealField hi = sample(g, [&](double x) { return std::cos(2 * M_PI * 60 * x / 50); });
  CHECK(out_of_band_fraction(hi) == doctest::Approx(1.0));
}
