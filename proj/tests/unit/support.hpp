#pragma once

#include "kdvlab/error.hpp"
#include "kdvlab/grid.hpp"

#include <cmath>
#include <optional>

namespace kdvlab::testing {

template <class F>
std::optional<ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double max_diff(const RealField& a, const RealField& b) { return (a.samples - b.samples).cwiseAbs().maxCoeff(); }

inline double rel_l2(const RealField& a, const RealField& b) { return (a.samples - b.samples).norm() / b.samples.norm(); }

} // namespace kdvlab::testing
