#pragma once

#include "kdvlab/grid.hpp"
#include "kdvlab/lax.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace kdvlab {

/// H^s_kappa as the domain or target of an operator.
struct WeightedSpace {
  double s;
  KappaParam kappa;
};

/// Grid-weighted Frobenius norm of the kernel, discretizing (int int |K|^2)^{1/2}.
double hs_norm(const DenseOperator& a);

/// Relative error of ||sqrt(R0) f sqrt(R0)||_HS against kappa^{-1/2} ||f||_{H^{-1}_kappa}.
double verify_hs_identity(const RealField& f, KappaParam kappa);

enum class NormMethod { Lanczos, PowerIteration };

/// Matrix-free linear map on R^n together with its transpose.
struct LinearMap {
  std::size_t size;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_transpose;
};

/// Largest singular value to the requested relative tolerance.
double largest_singular_value(const LinearMap& map, double rel_tol = 1e-9, NormMethod method = NormMethod::Lanczos,
                              int max_iterations = 2000);

/// Largest singular value of W_to (K dx) W_from^{-1}, W_s = (xi^2 + 4 kappa^2)^{s/2}.
double weighted_op_norm(const DenseOperator& a, const WeightedSpace& from, const WeightedSpace& to,
                        NormMethod method = NormMethod::Lanczos);

/// Weight sech(x/6)^power summed over periodic images.
RealField periodized_weight(const TorusGrid& grid, int power);

struct WeightAdmissibility {
  /// max (|w'| + |w''|) / w over the grid.
  double derivative_ratio;
  /// max w(y) / (w(x) e^{d(x,y)/2}) over sampled pairs, d the torus distance.
  double growth_ratio;
};
WeightAdmissibility check_weight(const RealField& w, std::size_t pair_stride = 8);

enum class CommutatorVariant { Plain, WithDerivative, Double, DoubleDerivative };
std::string to_string(CommutatorVariant v);
CommutatorVariant commutator_variant_from_string(const std::string& s);

struct ScalingReport {
  std::string variant;
  int weight_power = 1;
  std::string spaces;
  std::vector<double> kappas;
  std::vector<double> norms;
  double slope = 0.0;
  double ci = 0.0;
  bool width_ok = false;
  /// Kernel row and column sum maxima (L^inf and L^1 operator norms) where the
  /// kernel is explicit; empty otherwise.
  std::vector<double> schur_row;
  std::vector<double> schur_col;
  double schur_row_slope = 0.0;
  double schur_col_slope = 0.0;
  std::string note;
};

struct SlopeFit {
  double slope;
  double intercept;
  double ci;  // t_{0.975, n-2} times the standard error of the slope
};
/// Least-squares fit of log(y) against log(x).
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct AuditGrid {
  double length = 100.0;
  std::size_t points = 4096;
};

/// Norm of one commutator operator at one kappa.
double commutator_norm(const TorusGrid& grid, int weight_power, CommutatorVariant variant, double kappa,
                       NormMethod method = NormMethod::Lanczos);

ScalingReport commutator_scaling_audit(int weight_power, CommutatorVariant variant, const std::vector<double>& kappas,
                                       const AuditGrid& grid = {}, NormMethod method = NormMethod::Lanczos);

} // namespace kdvlab
