#include "kdvlab/metrics.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

namespace kdvlab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Applies a (possibly odd, purely imaginary) multiplier sym_re + i sym_im to v.
VectorXd apply_half(const TorusGrid& grid, const std::vector<Complex>& sym, const VectorXd& v) {
  const std::size_t n = grid.points();
  std::vector<Complex> bins(n / 2 + 1);
  forward(v.data(), bins.data(), n);
  for (std::size_t k = 0; k < bins.size(); ++k) bins[k] *= sym[k];
  VectorXd out(v.size());
  inverse(bins.data(), out.data(), n);
  return out;
}

template <class F>
std::vector<Complex> make_symbol(const TorusGrid& grid, F&& f) {
  std::vector<Complex> s(grid.points() / 2 + 1);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = f(grid.xi_half(k), k == grid.points() / 2);
  return s;
}

void transform_columns(MatrixXd& m, const TorusGrid& grid, const std::vector<Complex>& sym) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) = apply_half(grid, sym, m.col(j));
}

VectorXd start_vector(std::size_t n) {
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> nd;
  VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = nd(rng);
  return v.normalized();
}

double t_quantile_975(int df) {
  static constexpr std::array<double, 30> table = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
      2.120,  2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return std::numeric_limits<double>::infinity();
  if (df <= 30) return table[static_cast<std::size_t>(df - 1)];
  return 1.96;
}

double lanczos_top(const LinearMap& map, double rel_tol, int max_iterations) {
  const std::size_t n = map.size;
  const int m_max = std::min<int>(max_iterations, static_cast<int>(n));
  std::vector<VectorXd> q;
  std::vector<double> alpha, beta;
  q.push_back(start_vector(n));
  double theta = 0.0, prev_theta = 0.0;
  int stalled = 0;
  for (int j = 0; j < m_max; ++j) {
    VectorXd w = map.apply_transpose(map.apply(q.back()));
    alpha.push_back(q.back().dot(w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) w -= qi.dot(w) * qi;
    const double b = w.norm();
    const auto m = static_cast<Eigen::Index>(alpha.size());
    MatrixXd t = MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
    theta = es.eigenvalues()(m - 1);
    const double residual = b * std::abs(es.eigenvectors()(m - 1, m - 1));
    if (theta <= 0.0) return 0.0;
    if (residual <= rel_tol * theta || b <= 1e-14 * std::max(theta, 1e-300)) return std::sqrt(theta);
    // Near-degenerate tops converge in value long before the residual bound does.
    stalled = (std::abs(theta - prev_theta) <= rel_tol * theta) ? stalled + 1 : 0;
    if (stalled >= 5) return std::sqrt(theta);
    prev_theta = theta;
    beta.push_back(b);
    q.push_back(w / b);
  }
  throw Error(ErrorCode::NoConvergence, "Lanczos did not converge in " + std::to_string(m_max) + " steps");
}

double power_top(const LinearMap& map, double rel_tol, int max_iterations) {
  VectorXd v = start_vector(map.size);
  double prev = 0.0;
  int stalled = 0;
  for (int it = 0; it < max_iterations; ++it) {
    VectorXd w = map.apply_transpose(map.apply(v));
    const double theta = w.norm();
    if (theta == 0.0) return 0.0;
    v = w / theta;
    stalled = (it > 0 && std::abs(theta - prev) <= rel_tol * theta) ? stalled + 1 : 0;
    if (stalled >= 5) return std::sqrt(theta);
    prev = theta;
  }
  throw Error(ErrorCode::NoConvergence, "power iteration did not converge in " + std::to_string(max_iterations) +
                                            " steps");
}

} // namespace

double hs_norm(const DenseOperator& a) {
  if (!a.kernel.allFinite()) throw Error(ErrorCode::NonFiniteInput, "kernel has non-finite entries");
  return a.kernel.norm() * a.grid.dx();
}

double verify_hs_identity(const RealField& f, KappaParam kappa) {
  const double k = kappa.value();
  const double target = sobolev_kappa_norm(f, -1.0, kappa) / std::sqrt(k);
  if (!(target > 0.0)) throw Error(ErrorCode::DivisionByZeroNorm, "HS identity needs a nonzero field");
  const auto& grid = f.grid;
  const auto n = static_cast<Eigen::Index>(grid.points());
  const auto sqrt_r0 = make_symbol(grid, [k](double xi, bool) { return Complex(1.0 / std::sqrt(xi * xi + k * k), 0.0); });
  // Operator matrix of sqrt(R0) f sqrt(R0); its kernel is this divided by dx.
  MatrixXd m = MatrixXd::Identity(n, n);
  transform_columns(m, grid, sqrt_r0);
  m = f.samples.asDiagonal() * m;
  transform_columns(m, grid, sqrt_r0);
  const double hs = hs_norm(DenseOperator(grid, m / grid.dx()));
  return std::abs(hs - target) / target;
}

double largest_singular_value(const LinearMap& map, double rel_tol, NormMethod method, int max_iterations) {
  if (map.size == 0) return 0.0;
  return method == NormMethod::Lanczos ? lanczos_top(map, rel_tol, max_iterations)
                                       : power_top(map, rel_tol, max_iterations);
}

double weighted_op_norm(const DenseOperator& a, const WeightedSpace& from, const WeightedSpace& to,
                        NormMethod method) {
  const auto& grid = a.grid;
  const double kf = from.kappa.value(), kt = to.kappa.value();
  const auto w_to = make_symbol(grid, [&](double xi, bool) {
    return Complex(std::pow(xi * xi + 4.0 * kt * kt, 0.5 * to.s), 0.0);
  });
  const auto w_from_inv = make_symbol(grid, [&](double xi, bool) {
    return Complex(std::pow(xi * xi + 4.0 * kf * kf, -0.5 * from.s), 0.0);
  });
  MatrixXd b = a.matrix();
  transform_columns(b, grid, w_to);
  MatrixXd bt = b.transpose();
  transform_columns(bt, grid, w_from_inv);
  b = bt.transpose();
  LinearMap map{grid.points(), [&b](const VectorXd& v) { return VectorXd(b * v); },
                [&b](const VectorXd& v) { return VectorXd(b.transpose() * v); }};
  // Power iteration stalls on clustered spectra, so it gets a larger budget.
  return largest_singular_value(map, 1e-10, method, method == NormMethod::Lanczos ? 2000 : 200000);
}

RealField periodized_weight(const TorusGrid& grid, int power) {
  if (power < 1) throw Error(ErrorCode::InvalidArgument, "weight power must be >= 1");
  RealField psi = sample(grid, [&](double x) {
    double s = 0.0;
    for (int m = -20; m <= 20; ++m) s += 1.0 / std::cosh((x + m * grid.length()) / 6.0);
    return s;
  });
  psi.samples = psi.samples.array().pow(power).matrix();
  return psi;
}

WeightAdmissibility check_weight(const RealField& w, std::size_t pair_stride) {
  const RealField d1 = derivative(w, 1);
  const RealField d2 = derivative(w, 2);
  WeightAdmissibility out{0.0, 0.0};
  const std::size_t n = w.size();
  const double len = w.grid.length();
  for (std::size_t i = 0; i < n; ++i) out.derivative_ratio = std::max(out.derivative_ratio, (std::abs(d1[i]) + std::abs(d2[i])) / w[i]);
  const std::size_t stride = std::max<std::size_t>(1, pair_stride);
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = 0; j < n; j += stride) {
      double d = std::abs(w.grid.x(i) - w.grid.x(j));
      d = std::min(d, len - d);
      out.growth_ratio = std::max(out.growth_ratio, w[j] / (w[i] * std::exp(0.5 * d)));
    }
  return out;
}

std::string to_string(CommutatorVariant v) {
  switch (v) {
    case CommutatorVariant::Plain: return "plain";
    case CommutatorVariant::WithDerivative: return "with_derivative";
    case CommutatorVariant::Double: return "double";
    case CommutatorVariant::DoubleDerivative: return "double_derivative";
  }
  return "unknown";
}

CommutatorVariant commutator_variant_from_string(const std::string& s) {
  if (s == "plain") return CommutatorVariant::Plain;
  if (s == "with_derivative") return CommutatorVariant::WithDerivative;
  if (s == "double") return CommutatorVariant::Double;
  if (s == "double_derivative") return CommutatorVariant::DoubleDerivative;
  throw Error(ErrorCode::InvalidArgument, "unknown commutator variant '" + s + "'");
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope fit needs >= 2 paired values");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ci = std::numeric_limits<double>::infinity();
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - intercept - slope * lx[i];
      ssr += r * r;
    }
    const double se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    ci = t_quantile_975(static_cast<int>(n) - 2) * se;
  }
  return {slope, intercept, ci};
}

namespace {

// Circulant operator v -> sum_j c(x_i - x_j) v_j dx from a sampled kernel column.
std::vector<Complex> circulant_symbol(const TorusGrid& grid, const VectorXd& column) {
  std::vector<Complex> sym(grid.points() / 2 + 1);
  forward(column.data(), sym.data(), grid.points());
  for (auto& c : sym) c *= grid.dx();
  return sym;
}

// Periodized free kernel and its x-derivative sampled at separations i*dx.
VectorXd sampled_kernel(const TorusGrid& grid, double kappa, bool derivative_kernel) {
  const std::size_t n = grid.points();
  const double len = grid.length(), dx = grid.dx();
  const double e = std::exp(-kappa * len);
  VectorXd col(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) * dx;
    if (!derivative_kernel) {
      col[static_cast<Eigen::Index>(i)] = periodized_free_kernel(d, kappa, len);
      continue;
    }
    const double a = std::min(d, len - d);
    const double mag = (std::exp(-kappa * a) - std::exp(-kappa * (len - a))) / (2.0 * (1.0 - e));
    double v = d < 0.5 * len ? -mag : mag;
    if (i == 0 || 2 * i == n) v = 0.0;
    col[static_cast<Eigen::Index>(i)] = v;
  }
  return col;
}

} // namespace

double commutator_norm(const TorusGrid& grid, int weight_power, CommutatorVariant variant, double kappa,
                       NormMethod method) {
  if (kappa * grid.dx() > 0.5)
    throw Error(ErrorCode::UnresolvedKernel, "kappa * dx = " + std::to_string(kappa * grid.dx()) + " exceeds 0.5");
  const double k2 = kappa * kappa;
  const std::size_t n = grid.points();
  // The weights grow like e^{|x|/6}, so the operators use the exact exponentially
  // decaying kernels rather than truncated multipliers.
  const auto r0 = circulant_symbol(grid, sampled_kernel(grid, kappa, false));
  const auto dr0 = circulant_symbol(grid, sampled_kernel(grid, kappa, true));
  std::vector<Complex> r0sq(r0.size()), r0sq_d2(r0.size());
  for (std::size_t k = 0; k < r0.size(); ++k) {
    r0sq[k] = r0[k] * r0[k];
    // R0^2 d^2 as (R0 d)(R0 d), so the difference vanishes exactly for constant weights.
    r0sq_d2[k] = dr0[k] * dr0[k];
  }
  const auto lambda = make_symbol(grid, [k2](double xi, bool) { return Complex(xi * xi + 4.0 * k2, 0.0); });

  auto mul = [&grid](const std::vector<Complex>& s) {
    return [&grid, &s](const VectorXd& v) { return apply_half(grid, s, v); };
  };
  LinearMap map{n, nullptr, nullptr};
  switch (variant) {
    case CommutatorVariant::Plain:
    case CommutatorVariant::WithDerivative: {
      const VectorXd w = periodized_weight(grid, weight_power).samples;
      const VectorXd winv = w.cwiseInverse();
      const auto& sym = variant == CommutatorVariant::Plain ? r0 : dr0;
      const double adj_sign = variant == CommutatorVariant::Plain ? 1.0 : -1.0;
      map.apply = [w, winv, op = mul(sym)](const VectorXd& v) { return VectorXd(w.cwiseProduct(op(winv.cwiseProduct(v)))); };
      map.apply_transpose = [w, winv, op = mul(sym), adj_sign](const VectorXd& v) {
        return VectorXd(adj_sign * winv.cwiseProduct(op(w.cwiseProduct(v))));
      };
      break;
    }
    case CommutatorVariant::Double:
    case CommutatorVariant::DoubleDerivative: {
      const VectorXd psi = periodized_weight(grid, 1).samples;
      const VectorXd psi2 = psi.cwiseProduct(psi);
      const VectorXd pinv = psi.cwiseInverse();
      const bool deriv = variant == CommutatorVariant::DoubleDerivative;
      const auto first = deriv ? mul(dr0) : mul(r0);
      const auto inner = deriv ? mul(r0sq_d2) : mul(r0sq);
      const auto lam = mul(lambda);
      map.apply = [=](const VectorXd& v) {
        const VectorXd x = pinv.cwiseProduct(lam(v));
        const VectorXd a = first(psi2.cwiseProduct(first(x)));
        const VectorXd b = psi.cwiseProduct(inner(psi.cwiseProduct(x)));
        return VectorXd(lam(pinv.cwiseProduct(a - b)));
      };
      map.apply_transpose = map.apply;
      break;
    }
  }
  return largest_singular_value(map, 1e-9, method, method == NormMethod::Lanczos ? 600 : 200000);
}

ScalingReport commutator_scaling_audit(int weight_power, CommutatorVariant variant, const std::vector<double>& kappas,
                                       const AuditGrid& audit_grid, NormMethod method) {
  if (weight_power < 1 || weight_power > 3) throw Error(ErrorCode::InvalidArgument, "weight power must be 1, 2 or 3");
  if (kappas.size() < 4) throw Error(ErrorCode::InvalidArgument, "scaling audits need at least four kappa values");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (kappas[i] < 1.0 || kappas[i] > 64.0) throw Error(ErrorCode::InvalidArgument, "kappa values must lie in [1, 64]");
    if (i > 0 && !(kappas[i] > kappas[i - 1])) throw Error(ErrorCode::InvalidArgument, "kappa values must increase");
  }
  const TorusGrid grid(audit_grid.length, audit_grid.points);
  ScalingReport rep;
  rep.variant = to_string(variant);
  rep.weight_power = weight_power;
  const bool is_double = variant == CommutatorVariant::Double || variant == CommutatorVariant::DoubleDerivative;
  rep.spaces = is_double ? "H^-2_kappa->H^2_kappa" : "L2->L2";
  rep.kappas = kappas;
  for (double k : kappas) rep.norms.push_back(commutator_norm(grid, weight_power, variant, k, method));
  const SlopeFit fit = fit_loglog(rep.kappas, rep.norms);
  rep.slope = fit.slope;
  rep.ci = fit.ci;
  rep.width_ok = fit.ci <= 0.3;
  rep.note = "asymptotic slope over the listed kappa values; small kappa is preasymptotic";

  if (!is_double) {
    // Schur test on the explicit kernel w(x) K0(x - y) / w(y).
    const std::size_t n = grid.points();
    const VectorXd w = periodized_weight(grid, weight_power).samples;
    const double len = grid.length(), dx = grid.dx();
    for (double k : kappas) {
      VectorXd col(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) * dx;
        if (variant == CommutatorVariant::Plain) {
          col[static_cast<Eigen::Index>(i)] = periodized_free_kernel(d, k, len);
        } else {
          // x-derivative of the periodized kernel at separation d in [0, L).
          const double e = std::exp(-k * len);
          const double a = std::min(d, len - d);
          const double mag = (std::exp(-k * a) - std::exp(-k * (len - a))) / (2.0 * (1.0 - e));
          col[static_cast<Eigen::Index>(i)] = (i == 0) ? 0.0 : (d < 0.5 * len ? -mag : mag);
        }
      }
      VectorXd rows = VectorXd::Zero(static_cast<Eigen::Index>(n));
      VectorXd cols = VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
          const double kij = std::abs(w[ii] * col[static_cast<Eigen::Index>((i + n - j) % n)] / w[jj]) * dx;
          rows[ii] += kij;
          cols[jj] += kij;
        }
      rep.schur_row.push_back(rows.maxCoeff());
      rep.schur_col.push_back(cols.maxCoeff());
    }
    rep.schur_row_slope = fit_loglog(rep.kappas, rep.schur_row).slope;
    rep.schur_col_slope = fit_loglog(rep.kappas, rep.schur_col).slope;
  }
  return rep;
}

} // namespace kdvlab
