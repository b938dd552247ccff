#include "kdvlab/spectral.hpp"

#include "kdvlab/error.hpp"

#include <cmath>
#include <numbers>

namespace kdvlab {

namespace {

Complex ipow(int order) {
  // i^order
  switch (((order % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void require_finite(const RealField& f, const char* what) {
  if (!f.all_finite()) throw Error(ErrorCode::NonFiniteInput, std::string(what) + ": non-finite samples");
}

} // namespace

FourierMultiplier::FourierMultiplier(const TorusGrid& grid, const std::function<double(double)>& symbol)
    : grid_(grid), symbol_(grid.points()) {
  const auto& xi = grid.wavenumbers();
  for (std::size_t k = 0; k < xi.size(); ++k) symbol_[k] = symbol(xi[k]);
  for (double m : symbol_)
    if (!std::isfinite(m)) throw Error(ErrorCode::NonFiniteInput, "multiplier symbol has a non-finite entry");
}

FourierMultiplier::FourierMultiplier(const TorusGrid& grid, std::vector<double> symbol)
    : grid_(grid), symbol_(std::move(symbol)) {
  if (symbol_.size() != grid.points()) throw Error(ErrorCode::GridMismatch, "symbol length does not match grid");
  for (double m : symbol_)
    if (!std::isfinite(m)) throw Error(ErrorCode::NonFiniteInput, "multiplier symbol has a non-finite entry");
}

void FourierMultiplier::apply_in_place(Spectrum& s) const {
  // Half-spectrum bin k carries symbol_[k]; the Nyquist bin N/2 matches FFT index N/2.
  for (std::size_t k = 0; k < s.bins.size(); ++k) s.bins[k] *= symbol_[k];
}

RealField FourierMultiplier::apply(const RealField& f) const {
  if (f.grid != grid_) throw Error(ErrorCode::GridMismatch, "multiplier applied on a different grid");
  Spectrum s = forward(f);
  apply_in_place(s);
  return inverse(s);
}

FourierMultiplier FourierMultiplier::compose(const FourierMultiplier& other) const {
  if (other.grid_ != grid_) throw Error(ErrorCode::GridMismatch, "composing multipliers on different grids");
  std::vector<double> sym(symbol_.size());
  for (std::size_t k = 0; k < sym.size(); ++k) sym[k] = symbol_[k] * other.symbol_[k];
  return FourierMultiplier(grid_, std::move(sym));
}

FourierMultiplier free_resolvent(const TorusGrid& grid, double kappa) {
  const double k2 = kappa * kappa;
  return FourierMultiplier(grid, [k2](double xi) { return 1.0 / (xi * xi + k2); });
}

void derivative_in_place(Spectrum& s, int order) {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "derivative order must be nonnegative");
  if (order == 0) return;
  const auto& g = s.grid;
  const std::size_t nyq = g.points() / 2;
  const Complex phase = ipow(order);
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    if (k == nyq && order % 2 == 1) {
      s.bins[k] = 0.0;
      continue;
    }
    s.bins[k] *= phase * std::pow(g.xi_half(k), order);
  }
}

RealField derivative(const RealField& f, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "derivative order must be >= 1");
  require_finite(f, "derivative");
  Spectrum s = forward(f);
  derivative_in_place(s, order);
  return inverse(s);
}

RealField apply_resolvent_multiplier(const RealField& f, double kappa) {
  Spectrum s = forward(f);
  const double k2 = kappa * kappa;
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    const double xi = f.grid.xi_half(k);
    s.bins[k] /= xi * xi + k2;
  }
  return inverse(s);
}

RealField apply_free_resolvent(const RealField& f, KappaParam kappa) { return apply_resolvent_multiplier(f, kappa.value()); }

double weighted_spectral_energy(const Spectrum& s, const std::function<double(double)>& weight) {
  const auto& g = s.grid;
  const std::size_t n = g.points();
  const double scale = g.dx() * g.dx() / (2.0 * std::numbers::pi);
  double total = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double mult = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    total += mult * std::norm(s.bins[k]) * weight(g.xi_half(k));
  }
  return total * scale * g.dxi();
}

double integral(const RealField& f) { return f.samples.sum() * f.grid.dx(); }

double l2_norm(const RealField& f) { return std::sqrt(f.samples.squaredNorm() * f.grid.dx()); }

double inner_product(const RealField& f, const RealField& h) {
  require_same_grid(f, h);
  return f.samples.dot(h.samples) * f.grid.dx();
}

double sobolev_kappa_norm_squared(const RealField& f, double s, KappaParam kappa) {
  require_finite(f, "sobolev_kappa_norm");
  const double four_k2 = 4.0 * kappa.value() * kappa.value();
  const Spectrum spec = forward(f);
  if (s == 0.0) return weighted_spectral_energy(spec, [](double) { return 1.0; });
  return weighted_spectral_energy(spec, [s, four_k2](double xi) { return std::pow(xi * xi + four_k2, s); });
}

double sobolev_kappa_norm(const RealField& f, double s, KappaParam kappa) {
  return std::sqrt(sobolev_kappa_norm_squared(f, s, kappa));
}

double linf_embedding_ratio(const RealField& f, KappaParam kappa) {
  const double h1 = sobolev_kappa_norm(f, 1.0, kappa);
  if (!(h1 > 0.0)) throw Error(ErrorCode::DivisionByZeroNorm, "linf_embedding_ratio of the zero field");
  return f.max_abs() / (h1 / std::sqrt(kappa.value()));
}

namespace {

// Copies spectrum bins of `from` (size N) onto a grid of size M, rescaling so the
// interpolant is unchanged. The source Nyquist mode is dropped when `keep_nyquist` is false.
std::vector<Complex> transfer_bins(const std::vector<Complex>& from, std::size_t n, std::size_t m, bool keep_nyquist) {
  std::vector<Complex> to(m / 2 + 1, Complex{0.0, 0.0});
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  const std::size_t common = std::min(n, m) / 2;
  for (std::size_t k = 0; k < common; ++k) to[k] = from[k] * scale;
  if (keep_nyquist) {
    if (m > n) {
      to[n / 2] = 0.5 * from[n / 2] * scale;
    } else if (m == n) {
      to[n / 2] = from[n / 2];
    }
  }
  return to;
}

} // namespace

RealField resample(const RealField& f, std::size_t points) {
  if (points == f.size()) return f;
  TorusGrid target(f.grid.length(), points);
  const Spectrum s = forward(f);
  Spectrum out(target);
  out.bins = transfer_bins(s.bins, f.size(), points, points > f.size());
  return inverse(out);
}

RealField dealiased_product(const RealField& a, const RealField& b) {
  require_same_grid(a, b);
  const std::size_t n = a.size();
  std::size_t m = (3 * n) / 2;
  if (m % 2) ++m;
  const Spectrum sa = forward(a);
  const Spectrum sb = forward(b);
  std::vector<double> pa(m), pb(m);
  {
    const auto ba = transfer_bins(sa.bins, n, m, false);
    const auto bb = transfer_bins(sb.bins, n, m, false);
    inverse(ba.data(), pa.data(), m);
    inverse(bb.data(), pb.data(), m);
  }
  for (std::size_t i = 0; i < m; ++i) pa[i] *= pb[i];
  std::vector<Complex> prod(m / 2 + 1);
  forward(pa.data(), prod.data(), m);
  Spectrum out(a.grid);
  out.bins = transfer_bins(prod, m, n, false);
  return inverse(out);
}

RealField translate(const RealField& f, double shift) {
  Spectrum s = forward(f);
  const std::size_t nyq = f.size() / 2;
  for (std::size_t k = 0; k < nyq; ++k) s.bins[k] *= std::polar(1.0, -f.grid.xi_half(k) * shift);
  s.bins[nyq] *= std::cos(f.grid.xi_max() * shift);
  return inverse(s);
}

double out_of_band_fraction(const RealField& f) {
  const Spectrum s = forward(f);
  const std::size_t n = f.size();
  double total = 0.0, high = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double e = ((k == 0 || k == n / 2) ? 1.0 : 2.0) * std::norm(s.bins[k]);
    total += e;
    if (3 * k > n) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

TrigInterpolant::TrigInterpolant(const RealField& f) : grid_(f.grid) {
  const Spectrum s = forward(f);
  coeffs_ = s.bins;
  const double inv_n = 1.0 / static_cast<double>(f.size());
  for (auto& c : coeffs_) c *= inv_n;
}

double TrigInterpolant::operator()(double x) const {
  const std::size_t n = grid_.points();
  const double theta = grid_.dxi() * (x + 0.5 * grid_.length());
  const Complex step = std::polar(1.0, theta);
  Complex z = step;
  double acc = coeffs_[0].real();
  for (std::size_t k = 1; k < n / 2; ++k) {
    acc += 2.0 * (coeffs_[k] * z).real();
    z *= step;
  }
  acc += coeffs_[n / 2].real() * std::cos(grid_.xi_max() * (x + 0.5 * grid_.length()));
  return acc;
}

double TrigInterpolant::derivative(double x) const {
  const std::size_t n = grid_.points();
  const double theta = grid_.dxi() * (x + 0.5 * grid_.length());
  const Complex step = std::polar(1.0, theta);
  Complex z = step;
  double acc = 0.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double xi = grid_.dxi() * static_cast<double>(k);
    acc += 2.0 * (Complex(0.0, xi) * coeffs_[k] * z).real();
    z *= step;
  }
  return acc;
}

} // namespace kdvlab
