#pragma once

#include "kdvlab/grid.hpp"

#include <array>
#include <functional>
#include <string>

namespace kdvlab {

using FieldSampler = std::function<RealField(double t)>;

struct CoefficientMetadata {
  /// Claimed decay constant (delta or epsilon); 0 when nothing is claimed.
  double decay_constant = 0.0;
  /// Number of spatial derivatives the samplers support reliably.
  int smoothness = 3;
  bool time_independent = true;
  std::string descriptor = "zero";
};

/// The four coefficients of (a1 u')' + a2 u^2 + a3 u' + a4 u, each sampled at time t.
class CoefficientSet {
public:
  explicit CoefficientSet(const TorusGrid& grid);
  CoefficientSet(const TorusGrid& grid, std::array<FieldSampler, 4> samplers, CoefficientMetadata meta);

  /// Time-independent coefficients from fixed fields.
  static CoefficientSet from_fields(const RealField& a1, const RealField& a2, const RealField& a3, const RealField& a4,
                                    CoefficientMetadata meta = {});

  const TorusGrid& grid() const noexcept { return grid_; }
  const CoefficientMetadata& metadata() const noexcept { return meta_; }

  /// Coefficient a_j (j = 1..4) at time t.
  RealField a(int j, double t) const;
  /// True when coefficient j was never set (identically zero).
  bool is_zero(int j) const;
  bool all_zero() const;

private:
  TorusGrid grid_;
  std::array<FieldSampler, 4> samplers_;
  CoefficientMetadata meta_;
};

/// P(u) = (a1 u')' + a2 u^2 + a3 u' + a4 u with dealiased products.
RealField coefficient_terms(const RealField& u, double t, const CoefficientSet& coeffs);

} // namespace kdvlab
