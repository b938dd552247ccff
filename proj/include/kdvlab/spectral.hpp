#pragma once

#include "kdvlab/fft.hpp"
#include "kdvlab/grid.hpp"

#include <functional>
#include <vector>

namespace kdvlab {

/// Real Fourier multiplier m(xi_k), stored in FFT order. Symbols are even in xi.
class FourierMultiplier {
public:
  FourierMultiplier(const TorusGrid& grid, const std::function<double(double)>& symbol);
  FourierMultiplier(const TorusGrid& grid, std::vector<double> symbol);

  const TorusGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& symbol() const noexcept { return symbol_; }

  RealField apply(const RealField& f) const;
  void apply_in_place(Spectrum& s) const;
  FourierMultiplier compose(const FourierMultiplier& other) const;

private:
  TorusGrid grid_;
  std::vector<double> symbol_;
};

/// Free resolvent R0(kappa) = (-d^2 + kappa^2)^{-1} as a multiplier.
FourierMultiplier free_resolvent(const TorusGrid& grid, double kappa);

/// Spectral derivative of the given order; odd orders zero the Nyquist mode.
RealField derivative(const RealField& f, int order);
void derivative_in_place(Spectrum& s, int order);

RealField apply_free_resolvent(const RealField& f, KappaParam kappa);
/// Applies R0(kappa) for any kappa > 0; used where the resolvent parameter is 2*kappa.
RealField apply_resolvent_multiplier(const RealField& f, double kappa);

/// Continuum-normalized coefficients fhat_k = dx/sqrt(2 pi) * DFT_k(f) and the
/// weighted sum  sum_k |fhat_k|^2 w(xi_k) dxi  over the full FFT layout.
double weighted_spectral_energy(const Spectrum& s, const std::function<double(double)>& weight);

double l2_norm(const RealField& f);
double inner_product(const RealField& f, const RealField& h);
double integral(const RealField& f);

/// ||f||_{H^s_kappa} with symbol (xi^2 + 4 kappa^2)^s.
double sobolev_kappa_norm(const RealField& f, double s, KappaParam kappa);
double sobolev_kappa_norm_squared(const RealField& f, double s, KappaParam kappa);

/// ||f||_{L^inf} / (kappa^{-1/2} ||f||_{H^1_kappa}).
double linf_embedding_ratio(const RealField& f, KappaParam kappa);

/// Product with 3/2 zero padding (the 2/3 rule); the result keeps modes below N/2.
RealField dealiased_product(const RealField& a, const RealField& b);

/// Zero-pads (or truncates) the spectrum of f onto a grid with a different point count.
RealField resample(const RealField& f, std::size_t points);

/// Band-limited translation: returns g with g(x) = f(x - shift).
RealField translate(const RealField& f, double shift);

/// Energy fraction of f carried by modes with |k| > N/3.
double out_of_band_fraction(const RealField& f);

/// Evaluates the trigonometric interpolant of a periodic field at arbitrary points.
class TrigInterpolant {
public:
  explicit TrigInterpolant(const RealField& f);
  double operator()(double x) const;
  /// First derivative of the interpolant.
  double derivative(double x) const;
  const TorusGrid& grid() const noexcept { return grid_; }

private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

} // namespace kdvlab
