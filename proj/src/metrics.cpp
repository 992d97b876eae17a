#include "uwr/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "uwr/error.hpp"

namespace uwr {

PsnrResult psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("psnr: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.data.size());
  PsnrResult r;
  if (mse == 0.0) {
    r.infinite = true;
    return r;
  }
  r.value = 10.0 * std::log10(1.0 / mse);
  return r;
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::array<double, kWin> gaussian_kernel() {
  std::array<double, kWin> k{};
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable valid-mode Gaussian filter of one HxW plane -> (H-10)x(W-10).
std::vector<double> filter_valid(const double* p, int h, int w) {
  static const std::array<double, kWin> k = gaussian_kernel();
  const int ow = w - kWin + 1;
  const int oh = h - kWin + 1;
  std::vector<double> tmp(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[i] * p[y * w + x + i];
      tmp[static_cast<size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[i] * tmp[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("ssim: shape mismatch");
  if (a.height < kWin || a.width < kWin)
    throw ValidationError("ssim: image smaller than 11x11 window");
  constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L=1
  constexpr double kC2 = 0.03 * 0.03;  // (K2*L)^2

  const long n = a.pixels();
  std::vector<double> aa(n), bb(n), ab(n);
  double total = 0.0;
  for (int c = 0; c < Image::kChannels; ++c) {
    const double* pa = a.data.data() + static_cast<long>(c) * n;
    const double* pb = b.data.data() + static_cast<long>(c) * n;
    for (long i = 0; i < n; ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, a.height, a.width);
    const auto mu_b = filter_valid(pb, a.height, a.width);
    const auto m_aa = filter_valid(aa.data(), a.height, a.width);
    const auto m_bb = filter_valid(bb.data(), a.height, a.width);
    const auto m_ab = filter_valid(ab.data(), a.height, a.width);
    double sum = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = m_aa[i] - ma * ma;
      const double vb = m_bb[i] - mb * mb;
      const double cov = m_ab[i] - ma * mb;
      const double num = (2.0 * (ma * mb) + kC1) * (2.0 * cov + kC2);
      const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
      sum += num / den;
    }
    total += sum / static_cast<double>(mu_a.size());
  }
  return total / Image::kChannels;
}

}  // namespace uwr
