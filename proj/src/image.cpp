#include "uwr/image.hpp"

#include <algorithm>
#include <cmath>

#include "uwr/error.hpp"

namespace uwr {

bool all_finite(const Image& img) {
  for (double v : img.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool in_unit_range(const Image& img) {
  for (double v : img.data) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

Image clamp01(const Image& img) {
  if (!all_finite(img)) throw ValidationError("clamp01: non-finite input");
  Image out = img;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double max_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

Histogram256 histogram256(const Image& img) {
  Histogram256 h;
  const std::size_t n = img.pixels();
  for (int c = 0; c < Image::kChannels; ++c) {
    const double* p = img.data.data() + c * n;
    for (std::size_t i = 0; i < n; ++i) {
      const long bin = std::lround(p[i] * 255.0);
      h.bins[c][static_cast<std::size_t>(std::clamp(bin, 0l, 255l))]++;
    }
  }
  return h;
}

}  // namespace uwr
