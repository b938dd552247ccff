#include "kdvlab/grid.hpp"

#include "kdvlab/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace kdvlab {

namespace {

std::shared_ptr<const std::vector<double>> build_wavenumbers(double length, std::size_t n) {
  auto xi = std::make_shared<std::vector<double>>(n);
  const double scale = 2.0 * std::numbers::pi / length;
  const auto half = static_cast<long>(n / 2);
  for (std::size_t k = 0; k < n; ++k) {
    long m = static_cast<long>(k);
    if (m >= half) m -= static_cast<long>(n);
    (*xi)[k] = scale * static_cast<double>(m);
  }
  return xi;
}

} // namespace

TorusGrid::TorusGrid(double length, std::size_t points) : length_(length), points_(points) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorCode::NonPositiveLength, "grid length must be positive, got " + std::to_string(length));
  if (points % 2 != 0)
    throw Error(ErrorCode::OddPointCount, "grid point count must be even, got " + std::to_string(points));
  if (points < 8)
    throw Error(ErrorCode::InvalidArgument, "grid needs at least 8 points, got " + std::to_string(points));
  wavenumbers_ = build_wavenumbers(length, points);
}

double TorusGrid::dxi() const noexcept { return 2.0 * std::numbers::pi / length_; }

double TorusGrid::xi_max() const noexcept { return std::numbers::pi * static_cast<double>(points_) / length_; }

double TorusGrid::xi_half(std::size_t k) const noexcept {
  return k == points_ / 2 ? -xi_max() : dxi() * static_cast<double>(k);
}

Eigen::VectorXd TorusGrid::coordinates() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(points_));
  for (std::size_t i = 0; i < points_; ++i) x[static_cast<Eigen::Index>(i)] = this->x(i);
  return x;
}

TorusGrid make_grid(double length, std::size_t points) { return TorusGrid(length, points); }

RealField::RealField(const TorusGrid& g, Eigen::VectorXd values) : grid(g), samples(std::move(values)) {
  if (static_cast<std::size_t>(samples.size()) != grid.points())
    throw Error(ErrorCode::GridMismatch, "sample count " + std::to_string(samples.size()) +
                                             " does not match grid size " + std::to_string(grid.points()));
}

bool RealField::all_finite() const { return samples.allFinite(); }

double RealField::max_abs() const { return samples.size() == 0 ? 0.0 : samples.cwiseAbs().maxCoeff(); }

void require_same_grid(const RealField& a, const RealField& b) {
  if (a.grid != b.grid) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

RealField& RealField::operator+=(const RealField& other) {
  require_same_grid(*this, other);
  samples += other.samples;
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  require_same_grid(*this, other);
  samples -= other.samples;
  return *this;
}

RealField& RealField::operator*=(double s) {
  samples *= s;
  return *this;
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(RealField a, double s) { return a *= s; }
RealField operator*(double s, RealField a) { return a *= s; }

RealField pointwise(const RealField& a, const RealField& b) {
  require_same_grid(a, b);
  return RealField(a.grid, a.samples.cwiseProduct(b.samples));
}

KappaParam::KappaParam(double value) : value_(value) {
  if (!(value >= 1.0) || !std::isfinite(value))
    throw Error(ErrorCode::InvalidArgument, "kappa must satisfy kappa >= 1, got " + std::to_string(value));
}

} // namespace kdvlab
