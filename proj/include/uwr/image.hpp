#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace uwr {

/// Channel-major 3xHxW pixel container. Pipeline images hold unit-interval
/// intensities; YUV planes produced by rgb_to_yuv reuse the container but may
/// carry negative chroma values.
struct Image {
  static constexpr int kChannels = 3;

  int height = 0;
  int width = 0;
  std::vector<double> data;  // data[c*H*W + y*W + x]

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(kChannels) * h * w, fill) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

bool all_finite(const Image& img);
bool in_unit_range(const Image& img);

/// Elementwise clamp to [0,1]. Throws on non-finite input.
Image clamp01(const Image& img);

double max_abs_diff(const Image& a, const Image& b);

/// 256 bins per channel counting round(v*255) of unit-interval pixels.
struct Histogram256 {
  std::array<std::array<std::int64_t, 256>, Image::kChannels> bins{};
};

Histogram256 histogram256(const Image& img);

}  // namespace uwr
