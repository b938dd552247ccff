#include "kdvlab/smoothing.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace kdvlab {

namespace {

double wrap(double d, double len) {
  d = std::fmod(d + 0.5 * len, len);
  if (d < 0.0) d += len;
  return d - 0.5 * len;
}

double periodized_sech(double d, double len) {
  double s = 0.0;
  for (int m = -20; m <= 20; ++m) s += 1.0 / std::cosh((d + m * len) / 6.0);
  return s;
}

void require_nonempty(const Trajectory& traj) {
  if (traj.size() == 0) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no snapshots");
}

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = 0.5 * (t[i + 1] - t[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

double h1_norm(const RealField& f) {
  const RealField d = derivative(f, 1);
  return std::sqrt((f.samples.squaredNorm() + d.samples.squaredNorm()) * f.grid.dx());
}

double w1inf_norm(const RealField& f) { return f.max_abs() + derivative(f, 1).max_abs(); }

bool edge_decays(const TorusGrid& grid, const std::vector<double>& positions, const std::vector<double>& profile) {
  double edge = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    peak = std::max(peak, profile[i]);
    if (std::abs(positions[i]) >= 0.45 * grid.length()) edge = std::max(edge, profile[i]);
  }
  return edge <= 0.5 * peak;
}

} // namespace

WeightFamily::WeightFamily(const TorusGrid& grid, std::size_t stride) : grid_(grid), psi0_(grid) {
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "center stride must be positive");
  for (std::size_t i = 0; i < grid.points(); i += stride) centers_.push_back(grid.x(i));
}

WeightFamily::WeightFamily(const TorusGrid& grid, std::vector<double> centers)
    : grid_(grid), centers_(std::move(centers)), psi0_(grid) {
  if (centers_.empty()) throw Error(ErrorCode::InvalidArgument, "weight family needs at least one center");
}

RealField WeightFamily::psi(double center) const {
  const double len = grid_.length();
  return sample(grid_, [&](double x) { return periodized_sech(wrap(x - center, len), len); });
}

RealField WeightFamily::phi(double center) const {
  const RealField psi2 = pointwise(psi(center), psi(center));
  const double slope = psi2.samples.mean();
  Spectrum s = forward(psi2);
  s.bins[0] = 0.0;
  s.bins.back() = 0.0;
  for (std::size_t k = 1; k + 1 < s.bins.size(); ++k) s.bins[k] /= Complex{0.0, grid_.xi_half(k)};
  const RealField periodic = inverse(s);
  const double offset = TrigInterpolant(periodic)(center);
  const double len = grid_.length();
  RealField out(grid_);
  for (std::size_t i = 0; i < grid_.points(); ++i) out[i] = slope * wrap(grid_.x(i) - center, len) + periodic[i] - offset;
  return out;
}

RealField WeightFamily::phi_prime(double center) const {
  const RealField psi2 = pointwise(psi(center), psi(center));
  const double slope = psi2.samples.mean();
  RealField periodic = phi(center);
  const double len = grid_.length();
  for (std::size_t i = 0; i < grid_.points(); ++i) periodic[i] -= slope * wrap(grid_.x(i) - center, len);
  RealField out = derivative(periodic, 1);
  out.samples.array() += slope;
  return out;
}

std::vector<double> ls_profile(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights) {
  require_nonempty(traj);
  if (traj.grid != weights.grid()) throw Error(ErrorCode::GridMismatch, "weight family lives on a different grid");
  if (traj.size() > 1) uniform_save_interval(traj);
  const std::vector<double> w = trapezoid_weights(traj.times);
  std::vector<RealField> du;
  du.reserve(traj.size());
  for (const auto& u : traj.snapshots) du.push_back(derivative(u, 1));
  std::vector<double> out;
  out.reserve(weights.centers().size());
  for (double c : weights.centers()) {
    const RealField psi = weights.psi(c);
    double acc = 0.0;
    for (std::size_t n = 0; n < traj.size(); ++n) {
      if (w[n] == 0.0) continue;
      acc += w[n] * sobolev_kappa_norm_squared(pointwise(psi, du[n]), -1.0, kappa);
    }
    out.push_back(acc);
  }
  return out;
}

double ls_norm(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights) {
  const auto prof = ls_profile(traj, kappa, weights);
  return std::sqrt(*std::max_element(prof.begin(), prof.end()));
}

double local_mass(const Trajectory& traj, std::size_t center_stride) {
  require_nonempty(traj);
  if (center_stride == 0) throw Error(ErrorCode::InvalidArgument, "center stride must be positive");
  if (traj.grid.length() <= 2.0) throw Error(ErrorCode::InvalidArgument, "window of width 2 does not fit the torus");
  if (traj.size() > 1) uniform_save_interval(traj);
  const std::size_t n = traj.grid.points();
  const std::size_t m = 2 * n;
  const TorusGrid fine(traj.grid.length(), m);
  const std::vector<double> w = trapezoid_weights(traj.times);
  std::vector<double> window(m / 2 + 1);
  for (std::size_t k = 0; k < window.size(); ++k) {
    const double xi = fine.xi_half(k);
    window[k] = k == 0 ? 2.0 : 2.0 * std::sin(xi) / xi;
  }
  std::vector<double> acc(n, 0.0);
  const bool single = traj.size() == 1;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double wt = single ? 1.0 : w[t];
    if (wt == 0.0) continue;
    RealField sq = resample(traj.snapshots[t], m);
    sq.samples = sq.samples.cwiseAbs2();
    Spectrum s = forward(sq);
    for (std::size_t k = 0; k < window.size(); ++k) s.bins[k] *= window[k];
    const RealField local = inverse(s);
    for (std::size_t i = 0; i < n; ++i) acc[i] += wt * local[2 * i];
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; i += center_stride) best = std::max(best, acc[i]);
  return best;
}

HypothesisReport hypothesis_check(const CoefficientSet& coeffs, HypothesisMode mode, const HypothesisOptions& opts) {
  if (opts.times.empty()) throw Error(ErrorCode::InvalidArgument, "hypothesis check needs at least one time");
  if (opts.center_stride == 0) throw Error(ErrorCode::InvalidArgument, "center stride must be positive");
  const TorusGrid& grid = coeffs.grid();
  const std::size_t n = grid.points();
  HypothesisReport report{mode, {}};

  std::array<std::vector<RealField>, 4> fields;
  for (int j = 1; j <= 4; ++j)
    for (double t : opts.times) fields[j - 1].push_back(coeffs.a(j, t));

  if (mode == HypothesisMode::Pointwise) {
    for (int j = 1; j <= 4; ++j) {
      CoefficientMeasure& m = report.coeffs[j - 1];
      m.index = j;
      m.norm_used = "pointwise";
      m.positions.resize(n);
      m.profile.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) m.positions[i] = grid.x(i);
      for (const auto& a : fields[j - 1]) {
        const RealField da = derivative(a, 1);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = grid.x(i);
          const double wgt = 1.0 + x * x;
          m.profile[i] = std::max(m.profile[i], (std::abs(a[i]) + std::abs(da[i])) * wgt);
          m.alternative = std::max(m.alternative, std::abs(a[i]) * wgt);
        }
      }
      m.value = *std::max_element(m.profile.begin(), m.profile.end());
      double inner = 0.0, outer = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ax = std::abs(m.positions[i]);
        if (ax <= 0.25 * grid.length()) inner = std::max(inner, m.profile[i]);
        if (ax >= 0.4 * grid.length()) outer = std::max(outer, m.profile[i]);
      }
      m.decaying = outer <= 2.0 * inner;
    }
    return report;
  }

  const std::vector<double> tw = trapezoid_weights(opts.times);
  const bool single = opts.times.size() == 1;
  const WeightFamily family(grid, opts.center_stride);
  const double dz = static_cast<double>(opts.center_stride) * grid.dx();

  for (int j = 1; j <= 3; ++j) {
    CoefficientMeasure& m = report.coeffs[j - 1];
    m.index = j;
    double sum_h1 = 0.0, sum_w = 0.0;
    std::vector<double> prof_h1, prof_w;
    for (double z : family.centers()) {
      const RealField psi = family.psi(z);
      double h1 = 0.0, w1 = 0.0;
      for (std::size_t t = 0; t < opts.times.size(); ++t) {
        const RealField f = pointwise(psi, fields[j - 1][t]);
        if (j == 2) {
          h1 = std::max(h1, f.max_abs());
        } else if (j == 1) {
          h1 = std::max(h1, h1_norm(f));
          w1 = std::max(w1, w1inf_norm(f));
        } else {
          const double wt = single ? 1.0 : tw[t];
          const double a = h1_norm(f), b = w1inf_norm(f);
          h1 += wt * a * a;
          w1 += wt * b * b;
        }
      }
      if (j == 3) {
        h1 = std::sqrt(h1);
        w1 = std::sqrt(w1);
      }
      if (j == 2) w1 = h1;
      m.positions.push_back(z);
      prof_h1.push_back(h1);
      prof_w.push_back(w1);
      sum_h1 += h1 * dz;
      sum_w += w1 * dz;
    }
    const bool use_h1 = sum_h1 <= sum_w;
    m.value = use_h1 ? sum_h1 : sum_w;
    m.alternative = use_h1 ? sum_w : sum_h1;
    m.profile = use_h1 ? prof_h1 : prof_w;
    m.norm_used = j == 2 ? "Linf" : (use_h1 ? "H1" : "W1inf");
    m.decaying = edge_decays(grid, m.positions, m.profile);
  }

  CoefficientMeasure& m4 = report.coeffs[3];
  m4.index = 4;
  double h1 = 0.0, w1 = 0.0;
  m4.positions.resize(n);
  m4.profile.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m4.positions[i] = grid.x(i);
  for (const auto& a : fields[3]) {
    h1 = std::max(h1, h1_norm(a));
    w1 = std::max(w1, w1inf_norm(a));
    for (std::size_t i = 0; i < n; ++i) m4.profile[i] = std::max(m4.profile[i], std::abs(a[i]));
  }
  m4.value = std::min(h1, w1);
  m4.alternative = std::max(h1, w1);
  m4.norm_used = h1 <= w1 ? "H1" : "W1inf";
  m4.decaying = edge_decays(grid, m4.positions, m4.profile);
  return report;
}

BootstrapRecord bootstrap_audit(const Trajectory& traj, KappaParam kappa, double R, double epsilon,
                                const WeightFamily& weights, double admissibility_constant) {
  require_nonempty(traj);
  BootstrapRecord rec;
  rec.kappa = kappa.value();
  rec.R = R;
  rec.epsilon = epsilon;
  rec.T = std::max(std::abs(traj.times.front()), std::abs(traj.times.back()));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const RealField& u = traj.snapshots[i];
    rec.sup_H1k = std::max(rec.sup_H1k, sobolev_kappa_norm_squared(u, -1.0, kappa));
    if (rec.admissible && !kappa_admissible(u, kappa, admissibility_constant)) {
      rec.admissible = false;
      rec.note = "kappa not admissible at t = " + std::to_string(traj.times[i]);
    }
  }
  const double ls = ls_norm(traj, kappa, weights);
  rec.ls_sq = ls * ls;
  rec.B_T = rec.sup_H1k + 0.25 * rec.ls_sq;
  if (!rec.admissible) return rec;
  if (rec.B_T == 0.0) {
    rec.note = "zero solution";
    return rec;
  }
  const double k = rec.kappa;
  const double denom = R * R + (epsilon + std::pow(rec.T * k * k, 0.25) + 1.0 / (k * k)) * rec.B_T;
  rec.fitted_C = rec.B_T / denom;
  rec.fitted = true;
  return rec;
}

Horizon bootstrap_horizon(const Trajectory& traj, KappaParam kappa, const WeightFamily& weights, double threshold) {
  require_nonempty(traj);
  if (traj.grid != weights.grid()) throw Error(ErrorCode::GridMismatch, "weight family lives on a different grid");
  if (traj.size() > 1) uniform_save_interval(traj);
  std::vector<RealField> psi;
  for (double c : weights.centers()) psi.push_back(weights.psi(c));
  std::vector<double> acc(psi.size(), 0.0), prev(psi.size(), 0.0);
  double sup = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const RealField du = derivative(traj.snapshots[n], 1);
    sup = std::max(sup, sobolev_kappa_norm_squared(traj.snapshots[n], -1.0, kappa));
    double ls = 0.0;
    for (std::size_t c = 0; c < psi.size(); ++c) {
      const double cur = sobolev_kappa_norm_squared(pointwise(psi[c], du), -1.0, kappa);
      if (n > 0) acc[c] += 0.5 * (traj.times[n] - traj.times[n - 1]) * (cur + prev[c]);
      prev[c] = cur;
      ls = std::max(ls, acc[c]);
    }
    if (sup + 0.25 * ls > threshold) return {traj.times[n], true};
  }
  return {traj.times.back(), false};
}

} // namespace kdvlab
