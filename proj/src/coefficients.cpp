#include "kdvlab/coefficients.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/spectral.hpp"

#include <string>

namespace kdvlab {

CoefficientSet::CoefficientSet(const TorusGrid& grid) : grid_(grid) {}

CoefficientSet::CoefficientSet(const TorusGrid& grid, std::array<FieldSampler, 4> samplers, CoefficientMetadata meta)
    : grid_(grid), samplers_(std::move(samplers)), meta_(std::move(meta)) {}

CoefficientSet CoefficientSet::from_fields(const RealField& a1, const RealField& a2, const RealField& a3,
                                           const RealField& a4, CoefficientMetadata meta) {
  require_same_grid(a1, a2);
  require_same_grid(a1, a3);
  require_same_grid(a1, a4);
  meta.time_independent = true;
  auto fixed = [](const RealField& f) -> FieldSampler {
    if (f.max_abs() == 0.0) return nullptr;
    return [f](double) { return f; };
  };
  return CoefficientSet(a1.grid, {fixed(a1), fixed(a2), fixed(a3), fixed(a4)}, std::move(meta));
}

RealField CoefficientSet::a(int j, double t) const {
  if (j < 1 || j > 4) throw Error(ErrorCode::InvalidArgument, "coefficient index must be 1..4, got " + std::to_string(j));
  const auto& s = samplers_[static_cast<std::size_t>(j - 1)];
  if (!s) return RealField(grid_);
  RealField out = s(t);
  if (out.grid != grid_) throw Error(ErrorCode::GridMismatch, "coefficient sampler returned a field on another grid");
  return out;
}

bool CoefficientSet::is_zero(int j) const {
  if (j < 1 || j > 4) throw Error(ErrorCode::InvalidArgument, "coefficient index must be 1..4");
  return !samplers_[static_cast<std::size_t>(j - 1)];
}

bool CoefficientSet::all_zero() const {
  for (const auto& s : samplers_)
    if (s) return false;
  return true;
}

RealField coefficient_terms(const RealField& u, double t, const CoefficientSet& coeffs) {
  if (u.grid != coeffs.grid()) throw Error(ErrorCode::GridMismatch, "coefficients and field live on different grids");
  RealField out(u.grid);
  if (coeffs.all_zero()) return out;
  const bool need_du = !coeffs.is_zero(1) || !coeffs.is_zero(3);
  const RealField du = need_du ? derivative(u, 1) : RealField(u.grid);
  if (!coeffs.is_zero(1)) out += derivative(dealiased_product(coeffs.a(1, t), du), 1);
  if (!coeffs.is_zero(2)) out += dealiased_product(coeffs.a(2, t), dealiased_product(u, u));
  if (!coeffs.is_zero(3)) out += dealiased_product(coeffs.a(3, t), du);
  if (!coeffs.is_zero(4)) out += dealiased_product(coeffs.a(4, t), u);
  return out;
}

} // namespace kdvlab
