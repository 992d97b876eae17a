#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwr/image.hpp"

namespace uwr {

/// Parametric underwater degradation:
///   x_c = y_c * e^(-beta_c * d) + B_c * (1 - e^(-beta_c * d))
/// followed by an optional 3x3 box blur, additive Gaussian sensor noise, and
/// a clamp to [0,1].
struct DegradationParams {
  std::array<double, 3> beta{1.2, 0.6, 0.3};         // attenuation per unit depth
  std::array<double, 3> backscatter{0.05, 0.25, 0.35};
  double d_min = 0.3, d_max = 1.2;
  bool blur = false;  // 3x3 box
  double noise_sigma = 0.01;

  void validate() const;
};

/// Water presets "I", "II", "III": red attenuates fastest, blue-green cast.
DegradationParams water_preset(const std::string& name);

struct PairedSample {
  std::string name;    // basename, e.g. "0007.png"
  std::string x_path;  // degraded
  std::string y_path;  // clean
};

struct PairedDataset {
  std::vector<PairedSample> pairs;  // sorted by name
  std::vector<int> train_idx, test_idx;
  nlohmann::json manifest;  // empty object when the directory has none
};

struct LoadedPair {
  std::string name;
  Image x;  // degraded input
  Image y;  // clean reference
  LoadedPair() : x(1, 1), y(1, 1) {}
};

/// Seeded procedural clean image: a smooth two-color gradient background plus
/// 3-8 random colored ellipses/rectangles. size >= 16.
Image synth_clean(uint64_t seed, int size);

/// Applies the degradation model at depth d. Deterministic per seed.
Image degrade(const Image& y, double d, const DegradationParams& p, uint64_t seed);

/// Writes `clean/NNNN.png`, `degraded/NNNN.png` and `manifest.json` under
/// out_dir. The first round(train_frac*count) images form the train split.
PairedDataset generate_dataset(const std::string& out_dir, int count, int size,
                               const DegradationParams& p, uint64_t seed,
                               double train_frac = 0.8, unsigned jobs = 1);

/// Loads a paired directory (clean/ + degraded/ with matching filenames,
/// manifest.json optional). Without a manifest every pair belongs to both
/// splits. Verifies that all images share one size.
PairedDataset load_paired_dir(const std::string& dir);

/// Decodes the pairs of one split ("train"/"test") into memory, ordered by
/// dataset index.
std::vector<LoadedPair> load_pairs(const PairedDataset& ds, const std::string& split);

/// Deterministic per-epoch shuffle of 0..n-1 chunked into batches; the final
/// partial batch is kept.
std::vector<std::vector<int>> batch_iter(int n, int batch_size, uint64_t seed,
                                         int epoch);

}  // namespace uwr
