#pragma once

#include <vector>

#include "ssnu/common.hpp"
#include "ssnu/grid.hpp"

namespace ssnu::fft {

/// In-place forward transform: physical samples -> normalized DFT
/// coefficients g_m with f_j = sum_m g_m exp(2 pi i m.j / n).
void forward(const Grid& g, std::vector<Complex>& a);

/// In-place inverse transform (unnormalized counterpart of forward).
void inverse(const Grid& g, std::vector<Complex>& a);

}  // namespace ssnu::fft
