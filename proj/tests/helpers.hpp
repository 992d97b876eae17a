#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "uwr/image.hpp"

namespace testutil {

// Deterministic integer-pattern fills. The frozen expected values scattered
// through the tests were computed offline from these exact formulas.
inline double pat_x(long i) { return static_cast<double>((i * 37 + 11) % 101) / 100.0; }
inline double pat_w(long i) { return static_cast<double>(((i * 29 + 3) % 61) - 30) / 40.0; }
inline double pat_y(long i) { return static_cast<double>((i * 53 + 7) % 97) / 96.0; }

inline uwr::Image pattern_image(int h, int w, double (*pat)(long)) {
  uwr::Image img(h, w);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = pat(static_cast<long>(i));
  return img;
}

inline std::vector<float> pattern_vec(long n, double (*pat)(long)) {
  std::vector<float> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(pat(i));
  return v;
}

/// Self-deleting scratch directory for filesystem-facing tests.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("uwrtest-" + std::to_string((static_cast<std::uint64_t>(rd()) << 32) ^ rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
  std::string sub(const std::string& s) const { return (path / s).string(); }
};

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
