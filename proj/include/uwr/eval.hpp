#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwr/attack.hpp"
#include "uwr/dataset.hpp"
#include "uwr/image.hpp"
#include "uwr/metrics.hpp"
#include "uwr/model.hpp"

namespace uwr {

enum class EvalMethod { kAttack, kGaussian, kUniform, kNone };

struct EvalConfig {
  EvalMethod method = EvalMethod::kAttack;
  AttackConfig attack;            // attack arm settings
  double noise_epsilon = 8.0 / 255.0;  // gaussian/uniform arm
  uint64_t seed = 42;             // per-image seeds derive from (seed, index)
  unsigned jobs = 1;

  std::string method_name() const;
};

struct EvalRow {
  std::string image;
  std::string method;
  double eps255 = 0, alpha255 = 0;
  int iters = 0;
  std::string projection = "-";
  PsnrResult psnr_clean, psnr_adv, psnr_x_xadv;
  double ssim_clean = 0, ssim_adv = 0;
};

/// Mean over finite entries plus finite/infinite counts for one column.
struct ColumnStat {
  double mean = 0;
  long finite = 0;
  long infinite = 0;
};

struct RobustnessReport {
  std::vector<EvalRow> rows;  // ordered by dataset index
  ColumnStat psnr_clean, ssim_clean, psnr_adv, ssim_adv, psnr_x_xadv;
};

/// For each pair: f(x), the perturbed input (attack / noise / none), f of it,
/// PSNR/SSIM of both outputs against y, and PSNR(x, x_perturbed).
RobustnessReport evaluate(const Model& m, const std::vector<LoadedPair>& pairs,
                          const EvalConfig& cfg);

struct SweepCell {
  double eps255 = 0;
  int iters = 0;
  double mean_psnr_adv = 0;
  double mean_ssim_adv = 0;
};

struct SweepGrid {
  std::vector<SweepCell> cells;  // row-major over (eps, iters)
};

/// One evaluate() per (epsilon, iters) cell with a shared base seed.
/// eps_list entries are fractions of 1 (not 1/255 units).
SweepGrid sweep(const Model& m, const std::vector<LoadedPair>& pairs,
                const std::vector<double>& eps_list, const std::vector<int>& t_list,
                double alpha, AttackLoss loss, Projection projection,
                uint64_t seed, unsigned jobs);

/// Four conditions at matched epsilon: the attack itself, gaussian noise,
/// uniform noise, and untouched inputs.
struct NoiseStudy {
  std::vector<std::string> names;  // adversarial, gaussian, uniform, none
  std::vector<RobustnessReport> conditions;
};

NoiseStudy noise_compare(const Model& m, const std::vector<LoadedPair>& pairs,
                         const AttackConfig& adv, uint64_t seed, unsigned jobs);

/// Mean output displacement in YUV: luma = E|dY|, chroma = E|dU| + E|dV|.
struct DisplacementStats {
  double luma = 0;
  double chroma = 0;
};

struct HistReport {
  Histogram256 clean, pixel, color;     // histograms of f(x) and both attacks
  DisplacementStats pixel_disp, color_disp;
};

/// Runs the pixel and color-shift attacks on one pair and histograms the
/// three outputs. base supplies epsilon/alpha/iters/projection/init.
HistReport histogram_report(const Model& m, const Image& x, const Image& y,
                            const AttackConfig& base, uint64_t seed);

struct ImperceptRow {
  double eps255 = 0;
  int iters = 0;
  std::string projection;
  double mean_psnr = 0;  // over finite rows
  double min_psnr = 0;
  long infinite = 0;
};

/// One row of mean/min PSNR(x, x_adv) per epsilon (fractions of 1).
std::vector<ImperceptRow> imperceptibility_report(
    const Model& m, const std::vector<LoadedPair>& pairs,
    const std::vector<double>& eps_list, int iters, Projection projection,
    double alpha, AttackLoss loss, InitMode init, uint64_t seed, unsigned jobs);

/// Formats with %.12g; PSNR serializes the infinite flag as "inf".
std::string format_csv_double(double v);
std::string format_psnr(const PsnrResult& v);

void write_per_image_csv(const std::string& path, const RobustnessReport& r);
void write_summary_csv(const std::string& path, const RobustnessReport& r);
void write_sweep_csv(const std::string& path, const SweepGrid& g);
/// Per-image rows plus quartile:min/q1/median/q3/max summary rows per method.
void write_noise_csv(const std::string& path, const NoiseStudy& s);
void write_hist_csv(const std::string& path, const std::string& image,
                    const HistReport& h);
void write_impercept_csv(const std::string& path,
                         const std::vector<ImperceptRow>& rows);
/// Sorted-key JSON with trailing newline; byte-stable across reruns.
void write_meta_json(const std::string& path, const nlohmann::json& meta);

}  // namespace uwr
