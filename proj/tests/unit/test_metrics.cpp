#include "kdvlab/initial_data.hpp"
#include "kdvlab/lax.hpp"
#include "kdvlab/metrics.hpp"
#include "kdvlab/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace kdvlab;
using kdvlab::testing::error_code;

namespace {

DenseOperator gaussian_kernel(const TorusGrid& g) {
  Eigen::MatrixXd k(g.points(), g.points());
  for (std::size_t i = 0; i < g.points(); ++i)
    for (std::size_t j = 0; j < g.points(); ++j) {
      const double d = g.x(i) - g.x(j);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-d * d);
    }
  return DenseOperator(g, k);
}

DenseOperator random_operator(const TorusGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd k(g.points(), g.points());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = n(rng);
  return DenseOperator(g, k);
}

DenseOperator identity(const TorusGrid& g) {
  return DenseOperator(g, Eigen::MatrixXd::Identity(g.points(), g.points()) / g.dx());
}

} // namespace

TEST_CASE("hs norm") {
  const TorusGrid g(50, 256);
  CHECK(hs_norm(DenseOperator(g, Eigen::MatrixXd::Zero(256, 256))) == 0.0);

  // Off the wrap-around region the Gaussian kernel has int int e^{-2 d^2} = sqrt(pi/2) L
  // up to images; compare with a direct double sum instead.
  const DenseOperator a = gaussian_kernel(g);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i)
    for (std::size_t j = 0; j < g.points(); ++j) {
      const double d = g.x(i) - g.x(j);
      sum += std::exp(-2.0 * d * d) * g.dx() * g.dx();
    }
  CHECK(std::abs(hs_norm(a) - std::sqrt(sum)) <= 1e-8);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseOperator x = random_operator(g, rng);
    const DenseOperator y = random_operator(g, rng);
    const double tr = (x.matrix() * y.matrix()).trace();
    CHECK(std::abs(tr) <= hs_norm(x) * hs_norm(y) * (1 + 1e-12));
  }
}

TEST_CASE("hs norm is invariant under the discrete Fourier transform") {
  const TorusGrid g(20, 64);
  const DenseOperator a = gaussian_kernel(g);
  const Eigen::Index n = 64;
  Eigen::MatrixXcd f(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) f(i, j) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * M_PI * double(i * j) / double(n));
  const Eigen::MatrixXcd b = f * a.kernel.cast<std::complex<double>>() * f.adjoint();
  CHECK(std::abs(b.norm() * g.dx() - hs_norm(a)) <= 1e-9 * hs_norm(a));
}

TEST_CASE("hs identity") {
  const TorusGrid g(50, 512);
  const double e512 = verify_hs_identity(gaussian(g, 1.0, 1.0), KappaParam(2));
  CHECK(e512 <= 1e-3);
  const double e1024 = verify_hs_identity(gaussian(TorusGrid(50, 1024), 1.0, 1.0), KappaParam(2));
  CHECK(e1024 <= 0.5 * e512 + 1e-12);
  const double ec = verify_hs_identity(sample(g, [](double x) { return std::cos(x); }), KappaParam(2));
  CHECK(std::isfinite(ec));
  CHECK(error_code([&] { verify_hs_identity(RealField(g), KappaParam(2)); }) == ErrorCode::DivisionByZeroNorm);
}

TEST_CASE("weighted operator norms") {
  const TorusGrid g(50, 256);
  const KappaParam k(2);
  CHECK(weighted_op_norm(identity(g), {0.0, k}, {0.0, k}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(weighted_op_norm(identity(g), {1.0, k}, {1.0, k}) == doctest::Approx(1.0).epsilon(1e-9));
  const DenseOperator r0 = collocation_free_resolvent(g, 2.0);
  CHECK(weighted_op_norm(r0, {-1.0, k}, {1.0, k}) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(weighted_op_norm(r0, {0.0, k}, {0.0, k}) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(weighted_op_norm(r0, {0.0, k}, {0.0, k}, NormMethod::PowerIteration) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("operator norm never exceeds the hs norm") {
  const TorusGrid g(50, 128);
  std::mt19937_64 rng(8);
  const KappaParam k(1);
  const DenseOperator ops[] = {gaussian_kernel(g), random_operator(g, rng), periodized_free_resolvent(g, 1.0),
                               build_lax_resolvent(gaussian(g, 0.5, 1.0), KappaParam(2))};
  for (const auto& a : ops) CHECK(weighted_op_norm(a, {0.0, k}, {0.0, k}) <= hs_norm(a) * (1 + 1e-9));
}

TEST_CASE("weight admissibility") {
  const TorusGrid g(100, 1024);
  const WeightAdmissibility w = check_weight(periodized_weight(g, 1));
  CHECK(w.derivative_ratio <= 1.0);
  CHECK(w.growth_ratio <= 1.0);
  CHECK(error_code([&] { periodized_weight(g, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("log-log slope fit") {
  const std::vector<double> x{2, 4, 8, 16};
  const SlopeFit exact = fit_loglog(x, {0.25, 0.0625, 0.015625, 0.00390625});
  CHECK(exact.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(exact.ci < 1e-9);
  const SlopeFit noisy = fit_loglog(x, {0.26, 0.06, 0.016, 0.0038});
  CHECK(noisy.ci > 0.0);
  CHECK(std::abs(noisy.slope + 2.0) < noisy.ci + 0.1);
  CHECK(error_code([&] { fit_loglog({1, 2}, {1, -1}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("commutator audit plumbing") {
  const TorusGrid g(100, 1024);
  CHECK(error_code([&] { commutator_norm(g, 1, CommutatorVariant::Plain, 8.0); }) == ErrorCode::UnresolvedKernel);
  const double n2 = commutator_norm(g, 1, CommutatorVariant::Plain, 2.0);
  const double n4 = commutator_norm(g, 1, CommutatorVariant::Plain, 4.0);
  CHECK(std::log(n4 / n2) / std::log(2.0) == doctest::Approx(-2.0).epsilon(0.075));
  CHECK(commutator_norm(g, 1, CommutatorVariant::Plain, 4.0, NormMethod::PowerIteration) == doctest::Approx(n4).epsilon(1e-5));
  CHECK(error_code([&] { commutator_scaling_audit(1, CommutatorVariant::Plain, {2, 4, 8}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { commutator_scaling_audit(4, CommutatorVariant::Plain, {2, 4, 8, 16}); }) == ErrorCode::InvalidArgument);
  CHECK(commutator_variant_from_string(to_string(CommutatorVariant::DoubleDerivative)) == CommutatorVariant::DoubleDerivative);
}
