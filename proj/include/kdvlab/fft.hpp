#pragma once

#include "kdvlab/grid.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace kdvlab {

using Complex = std::complex<double>;

/// Half spectrum of a real field: unnormalized DFT bins k = 0..N/2.
struct Spectrum {
  TorusGrid grid;
  std::vector<Complex> bins;

  explicit Spectrum(const TorusGrid& g) : grid(g), bins(g.points() / 2 + 1) {}
};

/// Real-to-complex DFT, c_k = sum_j f_j exp(-2 pi i j k / N). Plans are cached per size.
Spectrum forward(const RealField& f);
void forward(const double* in, Complex* out, std::size_t n);

/// Inverse of forward(), including the 1/N factor.
RealField inverse(const Spectrum& s);
void inverse(const Complex* in, double* out, std::size_t n);

} // namespace kdvlab
