#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace uwr {

/// Deterministic random source. std::mt19937_64 is fully specified by the
/// standard, and all variate transforms are implemented here instead of
/// relying on std distributions (whose algorithms are implementation-defined),
/// so a given seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0,1) with 53 bits of entropy.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// N(0, sigma^2) via Box-Muller. Consumes two draws per sample.
  double normal(double sigma);

  /// Uniform index in [0,n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  /// Hash of the engine's full internal state, for reproducibility logs.
  std::string state_digest() const;

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent child seed from (base, a, b) via splitmix64 mixing.
/// Used to give images, epochs and batch items their own streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ull);

/// FNV-1a digest of a file's bytes as a 16-hex-digit string.
std::string file_digest(const std::string& path);

std::string to_hex(std::uint64_t v);

}  // namespace uwr
