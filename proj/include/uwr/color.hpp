#pragma once

#include <array>

#include "uwr/image.hpp"

namespace uwr {

// BT.601 analog-form YUV:
//   Y = 0.299 R + 0.587 G + 0.114 B
//   U = 0.492 (B - Y)
//   V = 0.877 (R - Y)
// expanded to a fixed 3x3 matrix shared by the plain conversion below and the
// differentiable color transform in the autodiff module.
inline constexpr double kYr = 0.299, kYg = 0.587, kYb = 0.114;
inline constexpr double kUscale = 0.492, kVscale = 0.877;
inline constexpr std::array<std::array<double, 3>, 3> kRgbToYuv = {{
    {kYr, kYg, kYb},
    {-kUscale * kYr, -kUscale * kYg, kUscale * (1.0 - kYb)},
    {kVscale * (1.0 - kYr), -kVscale * kYg, -kVscale * kYb},
}};

/// RGB -> (Y,U,V) planes. Output is not range-constrained; U and V may be
/// negative.
Image rgb_to_yuv(const Image& img);

/// Exact algebraic inverse of rgb_to_yuv. No clamping.
Image yuv_to_rgb(const Image& img);

}  // namespace uwr
