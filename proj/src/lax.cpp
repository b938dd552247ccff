#include "kdvlab/lax.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <string>

namespace kdvlab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Half-spectrum symbol values m(xi_k), k = 0..N/2.
template <class F>
std::vector<double> half_symbol(const TorusGrid& grid, F&& m) {
  std::vector<double> s(grid.points() / 2 + 1);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = m(grid.xi_half(k));
  return s;
}

// First column of the circulant matrix of a real even symbol (no dx scaling).
VectorXd circulant_column(const TorusGrid& grid, const std::vector<double>& sym) {
  const std::size_t n = grid.points();
  std::vector<Complex> bins(sym.begin(), sym.end());
  VectorXd col(static_cast<Eigen::Index>(n));
  inverse(bins.data(), col.data(), n);
  return col;
}

MatrixXd circulant_matrix(const VectorXd& col) {
  const auto n = col.size();
  MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = col[(i - j + n) % n];
  return m;
}

// Applies a multiplier to every column of m in place.
void apply_symbol_columns(MatrixXd& m, const std::vector<double>& sym) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<Complex> bins(n / 2 + 1);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double* col = m.col(j).data();
    forward(col, bins.data(), n);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] *= sym[k];
    inverse(bins.data(), col, n);
  }
}

// Circular convolution (a * f)_i = sum_j a_{i-j} f_j.
RealField circular_convolution(const VectorXd& a, const RealField& f) {
  const std::size_t n = f.size();
  std::vector<Complex> fa(n / 2 + 1), ff(n / 2 + 1);
  forward(a.data(), fa.data(), n);
  forward(f.samples.data(), ff.data(), n);
  for (std::size_t k = 0; k < ff.size(); ++k) ff[k] *= fa[k];
  RealField out(f.grid);
  inverse(ff.data(), out.samples.data(), n);
  return out;
}

VectorXd free_kernel_column(const TorusGrid& grid, double kappa) {
  const double k2 = kappa * kappa;
  return circulant_column(grid, half_symbol(grid, [k2](double xi) { return 1.0 / (xi * xi + k2); })) / grid.dx();
}

double power_iteration_abs_eig(const MatrixXd& m, int iterations) {
  const auto n = m.rows();
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i) + 0.1);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    VectorXd w = m * v;
    lambda = w.norm();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) return lambda;
    v = w / lambda;
  }
  return lambda;
}

RealField kdv_flux_terms(const RealField& u) {
  RealField out = derivative(u, 3) * -1.0;
  out += derivative(dealiased_product(u, u), 1) * 3.0;
  return out;
}

} // namespace

DenseOperator::DenseOperator(const TorusGrid& g, Eigen::MatrixXd k) : grid(g), kernel(std::move(k)) {
  const auto n = static_cast<Eigen::Index>(g.points());
  if (kernel.rows() != n || kernel.cols() != n)
    throw Error(ErrorCode::GridMismatch, "kernel dimensions do not match the grid");
}

RealField DenseOperator::apply(const RealField& f) const {
  if (f.grid != grid) throw Error(ErrorCode::GridMismatch, "operator applied to a field on another grid");
  return RealField(grid, kernel * f.samples * grid.dx());
}

double periodized_free_kernel(double d, double kappa, double length) {
  double a = std::fmod(std::abs(d), length);
  a = std::min(a, length - a);
  const double decay = std::exp(-kappa * length);
  return (std::exp(-kappa * a) + std::exp(-kappa * (length - a))) / (2.0 * kappa * (1.0 - decay));
}

DenseOperator periodized_free_resolvent(const TorusGrid& grid, double kappa) {
  const auto n = static_cast<Eigen::Index>(grid.points());
  VectorXd col(n);
  for (Eigen::Index i = 0; i < n; ++i)
    col[i] = periodized_free_kernel(static_cast<double>(i) * grid.dx(), kappa, grid.length());
  return DenseOperator(grid, circulant_matrix(col));
}

DenseOperator collocation_free_resolvent(const TorusGrid& grid, double kappa) {
  return DenseOperator(grid, circulant_matrix(free_kernel_column(grid, kappa)));
}

double free_diagonal(double kappa, double length) {
  const double e = std::exp(-kappa * length);
  return (1.0 + e) / (1.0 - e) / (2.0 * kappa);
}

RealField first_order_exact(const RealField& u, double kappa) {
  const double length = u.grid.length();
  const double e = std::exp(-kappa * length);
  const double coth = (1.0 + e) / (1.0 - e);
  const double inv_sinh2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
  Spectrum s = forward(u);
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    const double xi = u.grid.xi_half(k);
    double m = coth / (kappa * (xi * xi + 4.0 * kappa * kappa));
    if (k == 0) m += length * inv_sinh2 / (8.0 * kappa * kappa);
    s.bins[k] *= -m;
  }
  return inverse(s);
}

TailCorrection diagonal_tail(const RealField& u, double kappa) {
  const auto& grid = u.grid;
  const std::size_t n = grid.points();
  const double length = grid.length();
  const double k2 = kappa * kappa;
  const Eigen::ArrayXd uu = u.samples.array();
  Eigen::ArrayXd value = Eigen::ArrayXd::Zero(uu.size());
  Eigen::ArrayXd slope = Eigen::ArrayXd::Zero(uu.size());
  const std::size_t first = n / 2;
  const std::size_t last = first + 8 * n;
  for (std::size_t k = first; k <= last; ++k) {
    const double xi = grid.dxi() * static_cast<double>(k);
    const double d = xi * xi + k2;
    const double mult = (k == first) ? 1.0 : 2.0;
    const Eigen::ArrayXd dpu = d + uu;
    value += mult * uu.square() / (d * d * dpu);
    slope += mult * uu * (2.0 * d + uu) / (d * d * dpu.square());
  }
  // Remaining modes behave like 2 u^2 / xi^6.
  const double scale = std::pow(length / (2.0 * std::numbers::pi), 6);
  const double rem = 2.0 * scale / (5.0 * std::pow(static_cast<double>(last) + 0.5, 5));
  value += rem * uu.square();
  slope += 2.0 * rem * uu;
  return {RealField(grid, (value / length).matrix()), RealField(grid, (slope / length).matrix())};
}

LaxResolvent::LaxResolvent(const RealField& u, KappaParam kappa)
    : u_(u), kappa_(kappa), g_(u.grid), tail_slope_(u.grid) {
  if (!u.all_finite()) throw Error(ErrorCode::NonFiniteInput, "potential has non-finite samples");
  const auto& grid = u.grid;
  const double dx = grid.dx();
  const double k = kappa.value();
  const auto n = static_cast<Eigen::Index>(grid.points());

  const VectorXd lap = circulant_column(grid, half_symbol(grid, [](double xi) { return xi * xi; }));
  MatrixXd a = circulant_matrix(lap);
  a.diagonal() += (u.samples.array() + k * k).matrix();

  MatrixXd inv;
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    inv = llt.solve(MatrixXd::Identity(n, n));
  } else {
    Eigen::PartialPivLU<MatrixXd> lu(a);
    inv = lu.inverse();
  }
  if (!inv.allFinite())
    throw Error(ErrorCode::NearSingularOperator, "Lax operator is singular for kappa = " + std::to_string(k));
  const double smax = power_iteration_abs_eig(a, 60);
  const double inv_norm = power_iteration_abs_eig(inv, 60);
  if (!std::isfinite(inv_norm) || 1.0 / inv_norm < 1e-10 * smax)
    throw Error(ErrorCode::NearSingularOperator,
                "smallest singular value below 1e-10 of the largest; kappa = " + std::to_string(k) + " too small");

  kc_ = 0.5 * (inv + inv.transpose()) / dx;

  const VectorXd r = free_kernel_column(grid, k);
  const RealField h1c = circular_convolution(r.array().square().matrix(), u) * (-dx);
  const TailCorrection tail = diagonal_tail(u, k);
  tail_slope_ = tail.slope;
  g_ = first_order_exact(u, k) + tail.value;
  g_.samples.array() += free_diagonal(k, grid.length()) - r[0];
  g_.samples += kc_.diagonal() - h1c.samples;
}

DenseOperator LaxResolvent::kernel() const {
  const double k = kappa_.value();
  MatrixXd kern = kc_ + periodized_free_resolvent(grid(), k).kernel - collocation_free_resolvent(grid(), k).kernel;
  kern.diagonal() = g_.samples;
  return DenseOperator(grid(), std::move(kern));
}

RealField LaxResolvent::dg(const RealField& f) const {
  if (f.grid != grid()) throw Error(ErrorCode::GridMismatch, "direction lives on another grid");
  const double dx = grid().dx();
  const double k = kappa_.value();
  const VectorXd r = free_kernel_column(grid(), k);
  RealField out = first_order_exact(f, k);
  out.samples -= dx * (kc_.array().square().matrix() * f.samples);
  out += circular_convolution(r.array().square().matrix(), f) * dx;
  out.samples.array() += f.samples.array() * tail_slope_.samples.array();
  return out;
}

RealField LaxResolvent::drho(const RealField& f) const {
  const double k = kappa_.value();
  RealField out = dg(f);
  out.samples.array() /= 2.0 * g_.samples.array().square();
  out += apply_resolvent_multiplier(f, 2.0 * k) * (2.0 * k);
  return out;
}

DenseOperator build_lax_resolvent(const RealField& u, KappaParam kappa) { return LaxResolvent(u, kappa).kernel(); }

RealField greens_diagonal_direct(const RealField& u, KappaParam kappa) { return LaxResolvent(u, kappa).diagonal(); }

double series_contraction_bound(const RealField& u, KappaParam kappa) {
  const double mean = u.samples.mean();
  RealField fluct = u;
  fluct.samples.array() -= mean;
  const double k = kappa.value();
  return std::abs(mean) / (k * k) + sobolev_kappa_norm(fluct, -1.0, kappa) / std::sqrt(k);
}

SeriesResult greens_diagonal_series(const RealField& u, KappaParam kappa, const SeriesOptions& opts) {
  if (!u.all_finite()) throw Error(ErrorCode::NonFiniteInput, "potential has non-finite samples");
  if (opts.max_terms < 1) throw Error(ErrorCode::InvalidArgument, "series needs max_terms >= 1");
  const double bound = series_contraction_bound(u, kappa);
  if (bound > opts.contraction_limit)
    throw Error(ErrorCode::SeriesNotContracting,
                "contraction bound " + std::to_string(bound) + " exceeds " + std::to_string(opts.contraction_limit));
  const auto& grid = u.grid;
  const double k = kappa.value();
  const double k2 = k * k;

  RealField h1 = first_order_exact(u, k);
  RealField g = h1;
  g.samples.array() += free_diagonal(k, grid.length());
  g += diagonal_tail(u, k).value;
  int used = 1;
  double last = h1.max_abs();
  if (last < opts.tol) return {g, used, last};

  const auto sym = half_symbol(grid, [k2](double xi) { return 1.0 / (xi * xi + k2); });
  // m holds the kernel of (R0 u)^l R0.
  MatrixXd m = circulant_matrix(free_kernel_column(grid, k));
  for (int l = 1; l <= opts.max_terms; ++l) {
    m = u.samples.asDiagonal() * m;
    apply_symbol_columns(m, sym);
    if (l == 1) continue;
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    const VectorXd term = sign * m.diagonal();
    g.samples += term;
    used = l;
    last = term.cwiseAbs().maxCoeff();
    if (last < opts.tol) return {g, used, last};
  }
  throw Error(ErrorCode::NoConvergence,
              "series did not reach tol " + std::to_string(opts.tol) + " in " + std::to_string(opts.max_terms) +
                  " terms; last term " + std::to_string(last));
}

RealField h1_field(const RealField& u, KappaParam kappa) {
  const double k = kappa.value();
  return apply_resolvent_multiplier(u, 2.0 * k) * (-1.0 / k);
}

std::string to_string(GreensMethod m) { return m == GreensMethod::Direct ? "direct" : "series"; }

RealField density_from_diagonal(const RealField& u, const RealField& g, double kappa) {
  require_same_grid(u, g);
  if (g.samples.minCoeff() <= 0.0)
    throw Error(ErrorCode::NonPositiveGreens, "diagonal Green's function is not positive");
  RealField rho = apply_resolvent_multiplier(u, 2.0 * kappa) * (2.0 * kappa);
  rho.samples.array() += kappa - 0.5 / g.samples.array();
  return rho;
}

GreensData rho_alpha(const RealField& u, KappaParam kappa, GreensMethod method, const SeriesOptions& opts) {
  RealField g(u.grid);
  int terms = 0;
  if (method == GreensMethod::Direct) {
    g = greens_diagonal_direct(u, kappa);
  } else {
    SeriesResult s = greens_diagonal_series(u, kappa, opts);
    g = std::move(s.g);
    terms = s.terms_used;
  }
  RealField rho = density_from_diagonal(u, g, kappa.value());
  const double min_rho = rho.samples.minCoeff();
  if (min_rho < -1e-9)
    throw Error(ErrorCode::NegativeDensity, "density reaches " + std::to_string(min_rho) +
                                                "; grid under-resolved or kappa out of range");
  RealField one_over_g(u.grid, g.samples.cwiseInverse());
  RealField j = current_j(u, kappa, g);
  const double alpha = integral(rho);
  return GreensData{kappa, method, std::move(g), std::move(one_over_g), std::move(rho), alpha, std::move(j), terms};
}

double alpha_value(const RealField& u, KappaParam kappa) {
  const RealField g = greens_diagonal_direct(u, kappa);
  return integral(density_from_diagonal(u, g, kappa.value()));
}

RealField current_j(const RealField& u, KappaParam kappa, const RealField& g) {
  require_same_grid(u, g);
  if (g.samples.minCoeff() <= 0.0)
    throw Error(ErrorCode::NonPositiveGreens, "diagonal Green's function is not positive");
  const double k = kappa.value();
  RealField src = derivative(u, 2) - dealiased_product(u, u) * 3.0;
  RealField j = apply_resolvent_multiplier(src, 2.0 * k) * (2.0 * k);
  j.samples.array() += (4.0 * k * k * k * g.samples.array() - 2.0 * k * k + u.samples.array()) / g.samples.array();
  return j;
}

RealField dg_directional(const RealField& u, KappaParam kappa, const RealField& f) {
  return LaxResolvent(u, kappa).dg(f);
}

RealField drho_directional(const RealField& u, KappaParam kappa, const RealField& f) {
  return LaxResolvent(u, kappa).drho(f);
}

double microlaw_residual(const RealField& u, KappaParam kappa, const CoefficientSet& coeffs, double t) {
  const LaxResolvent res(u, kappa);
  const RealField j = current_j(u, kappa, res.diagonal());
  const RealField jp = derivative(j, 1);
  RealField r = jp;
  if (coeffs.all_zero()) {
    r += res.drho(kdv_flux_terms(u));
  } else {
    const RealField p = coefficient_terms(u, t, coeffs);
    r += res.drho(kdv_flux_terms(u) + p);
    r -= res.drho(p);
  }
  return l2_norm(r) / std::max(1.0, l2_norm(jp));
}

} // namespace kdvlab
