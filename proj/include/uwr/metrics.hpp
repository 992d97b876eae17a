#pragma once

#include "uwr/image.hpp"

namespace uwr {

struct PsnrResult {
  double value = 0.0;  // dB; unspecified when infinite
  bool infinite = false;
};

/// Peak-signal-to-noise ratio with peak 1.0 over all three channels.
/// infinite is set iff the images are bit-identical (MSE == 0).
PsnrResult psnr(const Image& a, const Image& b);

/// Mean structural similarity, 11x11 Gaussian window (sigma 1.5),
/// K1=0.01, K2=0.03, dynamic range 1. Windows are valid-only (no padding),
/// so both dimensions must be >= 11. Channel results are averaged.
double ssim(const Image& a, const Image& b);

}  // namespace uwr
