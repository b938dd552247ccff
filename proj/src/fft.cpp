#include "kdvlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace kdvlab {

namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.r2c);
      fftw_destroy_plan(p.c2r);
    }
  }

  const PlanPair& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<Complex> spec(n / 2 + 1);
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cspec, flags);
    p.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cspec, real.data(), flags | FFTW_DESTROY_INPUT);
    return plans_.emplace(n, p).first->second;
  }

private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

} // namespace

void forward(const double* in, Complex* out, std::size_t n) {
  const auto& p = cache().get(n);
  // r2c does not modify its input for out-of-place plans.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void inverse(const Complex* in, double* out, std::size_t n) {
  const auto& p = cache().get(n);
  std::vector<Complex> scratch(in, in + n / 2 + 1);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
}

Spectrum forward(const RealField& f) {
  Spectrum s(f.grid);
  forward(f.samples.data(), s.bins.data(), f.size());
  return s;
}

RealField inverse(const Spectrum& s) {
  RealField f(s.grid);
  inverse(s.bins.data(), f.samples.data(), s.grid.points());
  return f;
}

} // namespace kdvlab
