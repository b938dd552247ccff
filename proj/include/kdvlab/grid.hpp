#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <vector>

namespace kdvlab {

/// Uniform periodic grid on [-L/2, L/2). Sample i sits at x_i = -L/2 + i*dx.
///
/// Wavenumbers are stored in FFT order [0, 1, ..., N/2-1, -N/2, ..., -1]
/// scaled by 2*pi/L. The single Nyquist mode carries xi = -pi*N/L.
class TorusGrid {
public:
  TorusGrid(double length, std::size_t points);

  double length() const noexcept { return length_; }
  std::size_t points() const noexcept { return points_; }
  double dx() const noexcept { return length_ / static_cast<double>(points_); }
  /// Spacing of the dual lattice, 2*pi/L.
  double dxi() const noexcept;
  /// |xi| of the Nyquist mode, pi*N/L.
  double xi_max() const noexcept;

  double x(std::size_t i) const noexcept { return -0.5 * length_ + static_cast<double>(i) * dx(); }
  Eigen::VectorXd coordinates() const;

  /// Full FFT-order wavenumber array (length N).
  const std::vector<double>& wavenumbers() const noexcept { return *wavenumbers_; }
  /// Wavenumber of half-spectrum bin k in [0, N/2]; bin N/2 is the Nyquist mode.
  double xi_half(std::size_t k) const noexcept;

  bool operator==(const TorusGrid& other) const noexcept {
    return length_ == other.length_ && points_ == other.points_;
  }
  bool operator!=(const TorusGrid& other) const noexcept { return !(*this == other); }

private:
  double length_;
  std::size_t points_;
  std::shared_ptr<const std::vector<double>> wavenumbers_;
};

TorusGrid make_grid(double length, std::size_t points);

/// Real samples of a function on a TorusGrid at one time instant.
struct RealField {
  TorusGrid grid;
  Eigen::VectorXd samples;

  explicit RealField(const TorusGrid& g) : grid(g), samples(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.points()))) {}
  RealField(const TorusGrid& g, Eigen::VectorXd values);

  std::size_t size() const noexcept { return grid.points(); }
  double operator[](std::size_t i) const { return samples[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return samples[static_cast<Eigen::Index>(i)]; }

  bool all_finite() const;
  double max_abs() const;

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double s);
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(RealField a, double s);
RealField operator*(double s, RealField a);
/// Pointwise product without dealiasing.
RealField pointwise(const RealField& a, const RealField& b);

template <class F>
RealField sample(const TorusGrid& grid, F&& f) {
  RealField out(grid);
  for (std::size_t i = 0; i < grid.points(); ++i) out[i] = f(grid.x(i));
  return out;
}

void require_same_grid(const RealField& a, const RealField& b);

/// Frequency parameter kappa >= 1.
class KappaParam {
public:
  explicit KappaParam(double value);
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

private:
  double value_;
};

} // namespace kdvlab
