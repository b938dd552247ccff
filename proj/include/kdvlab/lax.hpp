#pragma once

#include "kdvlab/coefficients.hpp"
#include "kdvlab/grid.hpp"

#include <Eigen/Core>

#include <string>

namespace kdvlab {

/// N x N kernel with (A f)(x_i) = sum_j K_ij f(x_j) dx.
struct DenseOperator {
  TorusGrid grid;
  Eigen::MatrixXd kernel;

  DenseOperator(const TorusGrid& g, Eigen::MatrixXd k);
  RealField apply(const RealField& f) const;
  /// Matrix of the operator acting on sample vectors, K * dx.
  Eigen::MatrixXd matrix() const { return kernel * grid.dx(); }
};

/// Periodized line kernel cosh(kappa(L/2-|d|)) / (2 kappa sinh(kappa L/2)).
double periodized_free_kernel(double d, double kappa, double length);
DenseOperator periodized_free_resolvent(const TorusGrid& grid, double kappa);
/// Kernel of the multiplier 1/(xi^2+kappa^2) on the grid (a circulant matrix).
DenseOperator collocation_free_resolvent(const TorusGrid& grid, double kappa);

/// The resolvent (-d^2 + u + kappa^2)^{-1} of one potential, with its diagonal
/// Green's function and directional derivatives.
///
/// The collocation inverse is accurate away from the diagonal; on the diagonal the
/// free and first-order parts are replaced by their torus closed forms and the
/// modes beyond the grid are added back in local form.
class LaxResolvent {
public:
  LaxResolvent(const RealField& u, KappaParam kappa);

  const RealField& potential() const noexcept { return u_; }
  KappaParam kappa() const noexcept { return kappa_; }
  const TorusGrid& grid() const noexcept { return u_.grid; }

  /// Raw kernel of the inverse collocation matrix, A^{-1} / dx.
  const Eigen::MatrixXd& collocation_kernel() const noexcept { return kc_; }
  /// Kernel with the exact free part restored and the corrected diagonal.
  DenseOperator kernel() const;
  /// Diagonal Green's function g.
  const RealField& diagonal() const noexcept { return g_; }

  /// dg|_u(f) = -int G(x,y) f(y) G(y,x) dy.
  RealField dg(const RealField& f) const;
  /// drho|_u(f) = dg(f) / (2 g^2) + 2 kappa R0(2 kappa) f.
  RealField drho(const RealField& f) const;

private:
  RealField u_;
  KappaParam kappa_;
  Eigen::MatrixXd kc_;
  RealField g_;
  RealField tail_slope_;
};

/// Lowest order diagonal terms: closed-form torus value of the free diagonal and
/// the multiplier giving -int G0(x-y)^2 u(y) dy exactly on the torus.
double free_diagonal(double kappa, double length);
RealField first_order_exact(const RealField& u, double kappa);

/// High-frequency remainder of the diagonal beyond the grid modes, with its
/// pointwise derivative in u.
struct TailCorrection {
  RealField value;
  RealField slope;
};
TailCorrection diagonal_tail(const RealField& u, double kappa);

DenseOperator build_lax_resolvent(const RealField& u, KappaParam kappa);
RealField greens_diagonal_direct(const RealField& u, KappaParam kappa);

struct SeriesOptions {
  int max_terms = 40;
  double tol = 1e-10;
  /// Certified bound on the contraction ratio that the expansion requires.
  double contraction_limit = 0.5;
};

struct SeriesResult {
  RealField g;
  int terms_used;
  double last_term;
};

/// Upper bound on the operator norm of sqrt(R0) u sqrt(R0):
/// |mean u| / kappa^2 + kappa^{-1/2} ||u - mean u||_{H^{-1}_kappa}.
double series_contraction_bound(const RealField& u, KappaParam kappa);
SeriesResult greens_diagonal_series(const RealField& u, KappaParam kappa, const SeriesOptions& opts = {});

/// h1 = -kappa^{-1} R0(2 kappa) u.
RealField h1_field(const RealField& u, KappaParam kappa);

enum class GreensMethod { Direct, Series };
std::string to_string(GreensMethod m);

struct GreensData {
  KappaParam kappa;
  GreensMethod method;
  RealField g;
  RealField one_over_g;
  RealField rho;
  double alpha;
  RealField j;
  int series_terms_used;
};

/// rho = -1/(2g) + kappa + 2 kappa R0(2 kappa) u and its integral alpha.
GreensData rho_alpha(const RealField& u, KappaParam kappa, GreensMethod method = GreensMethod::Direct,
                     const SeriesOptions& opts = {});
/// Density from a given diagonal Green's function.
RealField density_from_diagonal(const RealField& u, const RealField& g, double kappa);
double alpha_value(const RealField& u, KappaParam kappa);

/// j = (1/g)(4 kappa^3 g - 2 kappa^2 + u) + 2 kappa R0(2 kappa)(u'' - 3 u^2).
RealField current_j(const RealField& u, KappaParam kappa, const RealField& g);

RealField dg_directional(const RealField& u, KappaParam kappa, const RealField& f);
RealField drho_directional(const RealField& u, KappaParam kappa, const RealField& f);

/// || drho(F) + j' - drho(P) ||_{L2} / max(1, ||j'||_{L2}) with F = -u''' + 6uu' + P.
double microlaw_residual(const RealField& u, KappaParam kappa, const CoefficientSet& coeffs, double t);

} // namespace kdvlab
