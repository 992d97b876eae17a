#include "uwr/color.hpp"

namespace uwr {

namespace {

Image apply3x3(const Image& img, const std::array<std::array<double, 3>, 3>& m) {
  Image out(img.height, img.width);
  const long n = img.pixels();
  const double* a = img.data.data();
  const double* b = a + n;
  const double* c = b + n;
  for (int ch = 0; ch < 3; ++ch) {
    double* o = out.data.data() + static_cast<long>(ch) * n;
    const double m0 = m[ch][0], m1 = m[ch][1], m2 = m[ch][2];
    for (long i = 0; i < n; ++i) o[i] = m0 * a[i] + m1 * b[i] + m2 * c[i];
  }
  return out;
}

std::array<std::array<double, 3>, 3> invert3x3(
    const std::array<std::array<double, 3>, 3>& m) {
  const double det =
      m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
      m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
      m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  const double inv = 1.0 / det;
  std::array<std::array<double, 3>, 3> r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
  return r;
}

const std::array<std::array<double, 3>, 3> kYuvToRgb = invert3x3(kRgbToYuv);

}  // namespace

Image rgb_to_yuv(const Image& img) { return apply3x3(img, kRgbToYuv); }

Image yuv_to_rgb(const Image& img) { return apply3x3(img, kYuvToRgb); }

}  // namespace uwr
