// Acceptance gate for the workbench. Each numbered criterion prints one
// PASS/FAIL line with its measured numbers; the process exits non-zero if any
// criterion fails. Thresholds are frozen here on purpose - do not tune them
// to make a failing run green.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gradscan.hpp"
#include "uwr/attack.hpp"
#include "uwr/autodiff.hpp"
#include "uwr/color.hpp"
#include "uwr/dataset.hpp"
#include "uwr/defense.hpp"
#include "uwr/eval.hpp"
#include "uwr/image.hpp"
#include "uwr/metrics.hpp"
#include "uwr/model.hpp"
#include "uwr/rng.hpp"

using namespace uwr;
namespace fs = std::filesystem;

namespace {

// ---- frozen thresholds ---------------------------------------------------

constexpr double kGradTol = 1e-3;        // max relative FD error
constexpr double kGradStep = 1e-3;       // finite-difference step
constexpr double kBallSlack = 1e-6;      // l-inf constraint slack
constexpr double kCumulativeFloorDb = 30.07;   // eps = 8/255, any iterate count
constexpr double kStepClipFloorDb = 28.13;     // T=5, alpha=2/255, zero init
constexpr double kPsnrGapTol = 1e-6;     // PSNR of a constant 0.1 gap vs 20 dB
constexpr double kSsimConstTol = 1e-7;   // SSIM(0,1) vs C2/(1+C2)
constexpr double kYuvRoundTrip = 1e-5;
constexpr double kCleanPsnrMinDb = 25.0;
constexpr double kAdvDropMinDb = 3.0;
constexpr double kTrainBudgetSec = 900.0;
constexpr double kRecoveryMin = 0.5;     // fraction of the gap won back
constexpr double kCleanRegressionMaxDb = 2.0;
constexpr double kMonotoneSlackDb = 0.2;
constexpr double kTraceWinFraction = 0.9;
// Mean chroma/luma displacement ratio of the color-shift attack, frozen from
// a pilot run of this binary (pilot measured 3.54 vs 0.57 for pixel).
constexpr double kColorRatioFloor = 1.5;

struct CheckResult {
  bool pass = true;
  std::vector<std::string> notes;
  std::string info;
};

void expect(CheckResult& r, bool ok, const std::string& what) {
  if (!ok) {
    r.pass = false;
    r.notes.push_back(what);
  }
}

std::string num(double v, int prec = 3) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// Everything the later criteria reuse from the training criterion.
struct Shared {
  fs::path root;
  std::vector<LoadedPair> train, test;
  Model std_model;
  double clean_db = 0.0;  // mean clean PSNR of the standard model
  double adv_db = 0.0;    // mean PSNR under the pixel attack
  bool trained = false;
};

// ---- criterion 1: autodiff gradients vs finite differences ----------------

CheckResult c1_gradients() {
  CheckResult r;
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 7919 + 17);
    const auto fill = [&](Tape& t, const DiffTensor& leaf, double lo, double hi) {
      std::vector<float> v(static_cast<size_t>(leaf.dims.numel()));
      for (float& f : v) f = static_cast<float>(rng.uniform(lo, hi));
      t.set_value(leaf, v);
    };

    {
      // pointwise / arithmetic / reduction primitives in one graph
      Tape t;
      const DiffTensor a = t.leaf(Dims::chw(3, 8, 8), true);
      const DiffTensor b = t.leaf(Dims::chw(3, 8, 8), true);
      fill(t, a, 0.1, 0.9);   // keeps relu preactivations away from the kink
      fill(t, b, -0.5, 0.5);
      const DiffTensor p = t.mean(t.mul(t.relu(a), t.sigmoid(b)));
      const DiffTensor q = t.l2norm(t.add(a, b));
      const DiffTensor s = t.sum(t.sub(a, b), Region::kPerChannel);
      const DiffTensor m = t.mean(t.mul(a, a), Region::kPerChannel);
      const DiffTensor loss =
          t.add(t.add(p, t.scale(q, 0.25)),
                t.scale(t.add(t.l2norm(s), t.l2norm(m, Region::kAll)), 0.125));
      worst = std::max(worst, grad_check(t, loss, {a, b}, kGradStep));
    }
    {
      // convolution stack, color transform and channel affine
      Tape t;
      const DiffTensor x = t.leaf(Dims::chw(3, 8, 8), true);
      const DiffTensor w1 = t.leaf(Dims::conv_weights(4, 3, 3), true);
      const DiffTensor b1 = t.leaf(Dims::vec(4), true);
      const DiffTensor w2 = t.leaf(Dims::conv_weights(3, 4, 3), true);
      const DiffTensor b2 = t.leaf(Dims::vec(3), true);
      const DiffTensor a3 = t.leaf(Dims::vec(3), true);
      const DiffTensor c3 = t.leaf(Dims::vec(3), true);
      fill(t, x, 0.05, 0.95);
      fill(t, w1, -0.4, 0.4);
      fill(t, b1, -0.2, 0.2);
      fill(t, w2, -0.3, 0.3);
      fill(t, b2, -0.1, 0.1);
      fill(t, a3, 0.5, 1.5);
      fill(t, c3, -0.3, 0.3);
      const DiffTensor h = t.sigmoid(t.conv2d(x, w1, b1));
      const DiffTensor out = t.conv2d(h, w2, b2);
      const DiffTensor aff = t.channel_affine(t.color_transform(out), a3, c3);
      const DiffTensor loss =
          t.add(t.mean(aff), t.scale(t.sum(t.l2norm(aff, Region::kPerChannel)), 0.01));
      worst = std::max(worst,
                       grad_check(t, loss, {x, w1, b1, w2, b2, a3, c3}, kGradStep));
    }
    {
      // affine enhancer end to end
      const Model m = build_affine({rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                                    rng.uniform(0.5, 1.5)},
                                   {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                    rng.uniform(-0.2, 0.2)});
      Model::Recorded rec = m.record(8, 8, true, true);
      fill(rec.tape, rec.x, 0.0, 1.0);
      const DiffTensor y = rec.tape.leaf(rec.out.dims, false);
      fill(rec.tape, y, 0.0, 1.0);
      const DiffTensor d = rec.tape.sub(rec.out, y);
      const DiffTensor loss = rec.tape.mean(rec.tape.mul(d, d));
      std::vector<DiffTensor> leaves = rec.params;
      leaves.push_back(rec.x);
      worst = std::max(worst, grad_check(rec.tape, loss, leaves, kGradStep));
    }
  }

  // Tiny enhancer end to end: the input gradient is the quantity every attack
  // step consumes, so it is checked at model level here; weight and bias
  // backward paths are covered by the primitive graphs above. Random draws are
  // screened so that central differences stay a valid oracle (no relu
  // pre-activation inside the step window, no gradient coordinate down at
  // float32 rounding noise), and every kink-clean draw must agree with the
  // difference quotient absolutely, so the screening cannot mask a defect.
  const testutil::GradScan scan =
      testutil::enhancer_input_grad_scan(build_tiny_enhancer(11), 8, 10, 777);
  expect(r, scan.mixed_failures == 0,
         std::to_string(scan.mixed_failures) + " screened draws disagree with FD");
  expect(r, scan.accepted == 10,
         "only " + std::to_string(scan.accepted) + "/10 scan draws accepted");
  worst = std::max(worst, scan.worst_rel);

  expect(r, worst < kGradTol,
         "max relative gradient error " + num(worst, 7) + " >= " + num(kGradTol, 4));
  r.info = "max rel err " + num(worst, 7) + " over 10 seeds (enhancer scan: " +
           std::to_string(scan.accepted) + " accepted of " +
           std::to_string(scan.tried) + " draws)";
  return r;
}

// ---- criterion 2: PGD constraint battery ----------------------------------

CheckResult c2_constraints() {
  CheckResult r;
  const Model models[3] = {build_tiny_enhancer(1), build_tiny_enhancer(2),
                           build_tiny_enhancer(3)};
  Rng rng(2024);
  int violations = 0;
  for (int run = 0; run < 100; ++run) {
    const Model& m = models[run % 3];
    Image x(12, 12), y(12, 12);
    for (double& v : x.data) v = rng.uniform();
    for (double& v : y.data) v = rng.uniform();
    AttackConfig a;
    a.epsilon = rng.uniform(0.0, 16.0 / 255.0);
    a.alpha = rng.uniform(0.0, 4.0 / 255.0);
    a.iters = 1 + static_cast<int>(rng.uniform_index(8));
    a.loss = static_cast<AttackLoss>(rng.uniform_index(3));
    a.mask = static_cast<ChannelMask>(rng.uniform_index(4));
    a.projection = Projection::kCumulative;
    a.seed = rng.next_u64();
    const AttackResult res = pgd_attack(m, x, y, a);

    bool ok = max_abs_diff(res.x_adv, x) <= a.epsilon + kBallSlack &&
              res.linf <= a.epsilon + kBallSlack && in_unit_range(res.x_adv) &&
              res.loss_trace.size() == static_cast<size_t>(a.iters) + 1;
    if (a.mask != ChannelMask::kNone) {
      const int keep = static_cast<int>(a.mask) - 1;  // kR=1 -> channel 0
      const long n = x.pixels();
      for (int c = 0; c < 3 && ok; ++c) {
        if (c == keep) continue;
        for (long i = 0; i < n; ++i)
          if (res.x_adv.data[c * n + i] != x.data[c * n + i]) {
            ok = false;
            break;
          }
      }
    }
    if (!ok) ++violations;
  }
  expect(r, violations == 0,
         std::to_string(violations) + "/100 runs violated a constraint");
  r.info = "100 randomized cumulative runs";
  return r;
}

// ---- criterion 3: imperceptibility floors ----------------------------------

CheckResult c3_floors() {
  CheckResult r;
  const Model m = build_tiny_enhancer(3);
  DegradationParams p = water_preset("II");
  std::vector<LoadedPair> pairs(12);
  for (int i = 0; i < 12; ++i) {
    pairs[i].name = std::to_string(i) + ".png";
    pairs[i].y = synth_clean(900 + i, 32);
    pairs[i].x = degrade(pairs[i].y, 0.6, p, 950 + i);
  }

  const auto rows = imperceptibility_report(m, pairs, {8.0 / 255.0}, 20,
                                            Projection::kCumulative, 2.0 / 255.0,
                                            AttackLoss::kPixel, InitMode::kUniform,
                                            42, jobs());
  expect(r, rows.size() == 1 && rows[0].infinite == 0,
         "expected one all-finite imperceptibility row");
  const double min_cum = rows.empty() ? 0.0 : rows[0].min_psnr;
  expect(r, min_cum >= kCumulativeFloorDb,
         "cumulative eps=8/255: min PSNR(x,x_adv) " + num(min_cum) + " dB < " +
             num(kCumulativeFloorDb) + " dB");

  double min_clip = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pairs.size(); ++i) {
    AttackConfig a;
    a.epsilon = 8.0 / 255.0;
    a.alpha = 2.0 / 255.0;
    a.iters = 5;
    a.projection = Projection::kStepClip;
    a.init = InitMode::kZero;
    a.seed = derive_seed(42, i);
    const AttackResult res = pgd_attack(m, pairs[i].x, pairs[i].y, a);
    const PsnrResult q = psnr(pairs[i].x, res.x_adv);
    if (!q.infinite) min_clip = std::min(min_clip, q.value);
  }
  expect(r, min_clip >= kStepClipFloorDb,
         "step-clip T=5, zero init: min PSNR(x,x_adv) " + num(min_clip) +
             " dB < " + num(kStepClipFloorDb) + " dB");
  r.info = "cumulative min " + num(min_cum) + " dB, step-clip min " +
           num(min_clip) + " dB";
  return r;
}

// ---- criterion 4: metric identities ----------------------------------------

CheckResult c4_metrics() {
  CheckResult r;
  const PsnrResult gap = psnr(Image(16, 16, 0.2), Image(16, 16, 0.3));
  expect(r, !gap.infinite && std::fabs(gap.value - 20.0) <= kPsnrGapTol,
         "PSNR of constant 0.1 gap = " + num(gap.value, 9) + " dB, expected 20");

  const double s01 = ssim(Image(16, 16, 0.0), Image(16, 16, 1.0));
  const double expected = 0.0001 / 1.0001;  // C2 / (1 + C2)
  expect(r, std::fabs(s01 - expected) <= kSsimConstTol,
         "SSIM(0,1) = " + num(s01, 9) + ", expected " + num(expected, 9));

  const Image a = synth_clean(5, 32);
  expect(r, ssim(a, a) == 1.0, "SSIM(a,a) != 1.0");

  const double rt = max_abs_diff(yuv_to_rgb(rgb_to_yuv(a)), a);
  expect(r, rt <= kYuvRoundTrip,
         "YUV round trip error " + num(rt, 9) + " > " + num(kYuvRoundTrip, 6));
  r.info = "psnr gap " + num(gap.value, 7) + " dB, yuv round trip " + num(rt, 9);
  return r;
}

// ---- criterion 5: standard training and robustness gap ---------------------

double mean_psnr_adv(const Model& m, const std::vector<LoadedPair>& pairs,
                     EvalMethod method) {
  EvalConfig cfg;
  cfg.method = method;
  cfg.attack.epsilon = 8.0 / 255.0;
  cfg.attack.alpha = 2.0 / 255.0;
  cfg.attack.iters = 20;
  cfg.attack.loss = AttackLoss::kPixel;
  cfg.noise_epsilon = 8.0 / 255.0;
  cfg.seed = 42;
  cfg.jobs = jobs();
  return evaluate(m, pairs, cfg).psnr_adv.mean;
}

CheckResult c5_training(Shared& sh) {
  CheckResult r;
  const std::string dir = (sh.root / "data").string();
  DegradationParams p = water_preset("II");
  generate_dataset(dir, 240, 64, p, 42, 200.0 / 240.0, jobs());
  const PairedDataset ds = load_paired_dir(dir);
  sh.train = load_pairs(ds, "train");
  sh.test = load_pairs(ds, "test");
  expect(r, sh.train.size() == 200 && sh.test.size() == 40,
         "expected a 200/40 split, got " + std::to_string(sh.train.size()) + "/" +
             std::to_string(sh.test.size()));

  sh.std_model = build_tiny_enhancer(7);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 6;
  cfg.lr = 1e-3;
  cfg.seed = 42;
  cfg.jobs = jobs();
  const auto t0 = std::chrono::steady_clock::now();
  train(sh.std_model, sh.train, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sh.trained = true;
  expect(r, secs <= kTrainBudgetSec,
         "training took " + num(secs, 1) + " s > " + num(kTrainBudgetSec, 0) + " s");

  EvalConfig atk;
  atk.attack.epsilon = 8.0 / 255.0;
  atk.attack.alpha = 2.0 / 255.0;
  atk.attack.iters = 20;
  atk.attack.loss = AttackLoss::kPixel;
  atk.seed = 42;
  atk.jobs = jobs();
  const RobustnessReport rep = evaluate(sh.std_model, sh.test, atk);
  sh.clean_db = rep.psnr_clean.mean;
  sh.adv_db = rep.psnr_adv.mean;
  const double drop = sh.clean_db - sh.adv_db;
  expect(r, sh.clean_db >= kCleanPsnrMinDb,
         "mean clean PSNR " + num(sh.clean_db) + " dB < " + num(kCleanPsnrMinDb) +
             " dB");
  expect(r, drop >= kAdvDropMinDb,
         "adversarial drop " + num(drop) + " dB < " + num(kAdvDropMinDb) + " dB");

  const double gauss_drop =
      sh.clean_db - mean_psnr_adv(sh.std_model, sh.test, EvalMethod::kGaussian);
  const double unif_drop =
      sh.clean_db - mean_psnr_adv(sh.std_model, sh.test, EvalMethod::kUniform);
  expect(r, gauss_drop <= drop / 2.0,
         "gaussian noise drop " + num(gauss_drop) + " dB > half the adversarial drop");
  expect(r, unif_drop <= drop / 2.0,
         "uniform noise drop " + num(unif_drop) + " dB > half the adversarial drop");

  r.info = "clean " + num(sh.clean_db, 2) + " dB, adv " + num(sh.adv_db, 2) +
           " dB, noise drops " + num(gauss_drop, 2) + "/" + num(unif_drop, 2) +
           " dB, train " + num(secs, 1) + " s";
  return r;
}

// ---- criterion 6: adversarial finetuning ----------------------------------

CheckResult c6_finetune(const Shared& sh) {
  CheckResult r;
  if (!sh.trained) {
    expect(r, false, "skipped: criterion 5 did not produce a model");
    return r;
  }
  Model ft = sh.std_model;
  TrainConfig cfg;
  cfg.mode = TrainMode::kAdversarial;
  cfg.epochs = 20;
  cfg.batch_size = 6;
  cfg.lr = 1e-3;
  cfg.lambda = 1.0;
  cfg.inner.epsilon = 8.0 / 255.0;
  cfg.inner.alpha = 2.0 / 255.0;
  cfg.inner.iters = 20;
  cfg.seed = 42;
  cfg.jobs = jobs();
  train(ft, sh.train, cfg);

  EvalConfig atk;
  atk.attack.epsilon = 8.0 / 255.0;
  atk.attack.alpha = 2.0 / 255.0;
  atk.attack.iters = 20;
  atk.attack.loss = AttackLoss::kPixel;
  atk.seed = 42;
  atk.jobs = jobs();
  const RobustnessReport rep = evaluate(ft, sh.test, atk);

  const double gap = sh.clean_db - sh.adv_db;
  const double recovered = rep.psnr_adv.mean - sh.adv_db;
  const double regression = sh.clean_db - rep.psnr_clean.mean;
  expect(r, gap > 0 && recovered >= kRecoveryMin * gap,
         "recovered " + num(recovered) + " dB of a " + num(gap) +
             " dB gap (< " + num(100 * kRecoveryMin, 0) + "%)");
  expect(r, regression <= kCleanRegressionMaxDb,
         "clean PSNR regressed by " + num(regression) + " dB > " +
             num(kCleanRegressionMaxDb) + " dB");
  r.info = "recovered " + num(recovered, 2) + "/" + num(gap, 2) +
           " dB, clean regression " + num(regression, 2) + " dB";
  return r;
}

// ---- criterion 7: epsilon monotonicity and trace growth --------------------

CheckResult c7_monotone(const Shared& sh) {
  CheckResult r;
  if (!sh.trained) {
    expect(r, false, "skipped: criterion 5 did not produce a model");
    return r;
  }
  const std::vector<double> eps = {1.0 / 255.0, 2.0 / 255.0, 4.0 / 255.0,
                                   8.0 / 255.0};
  const SweepGrid g = sweep(sh.std_model, sh.test, eps, {20}, 2.0 / 255.0,
                            AttackLoss::kPixel, Projection::kCumulative, 42,
                            jobs());
  std::string curve;
  for (size_t k = 0; k < g.cells.size(); ++k) {
    curve += (k ? " -> " : "") + num(g.cells[k].mean_psnr_adv, 2);
    if (k > 0)
      expect(r,
             g.cells[k].mean_psnr_adv <=
                 g.cells[k - 1].mean_psnr_adv + kMonotoneSlackDb,
             "mean adv PSNR rose from " + num(g.cells[k - 1].mean_psnr_adv) +
                 " to " + num(g.cells[k].mean_psnr_adv) + " dB at eps " +
                 num(g.cells[k].eps255, 0) + "/255");
  }

  int wins = 0;
  for (size_t i = 0; i < sh.test.size(); ++i) {
    AttackConfig a;
    a.epsilon = 8.0 / 255.0;
    a.alpha = 2.0 / 255.0;
    a.iters = 20;
    a.loss = AttackLoss::kPixel;
    a.seed = derive_seed(42, i);
    const AttackResult res = pgd_attack(sh.std_model, sh.test[i].x, sh.test[i].y, a);
    if (res.loss_trace.back() > res.loss_trace[1]) ++wins;
  }
  const double frac = static_cast<double>(wins) / static_cast<double>(sh.test.size());
  expect(r, frac >= kTraceWinFraction,
         "20-step loss beat the 1-step loss on only " + num(100 * frac, 1) +
             "% of images");
  r.info = curve + " dB; trace wins " + std::to_string(wins) + "/" +
           std::to_string(sh.test.size());
  return r;
}

// ---- criterion 8: chroma vs luma displacement ------------------------------

CheckResult c8_displacement(const Shared& sh) {
  CheckResult r;
  if (!sh.trained) {
    expect(r, false, "skipped: criterion 5 did not produce a model");
    return r;
  }
  const size_t n = std::min<size_t>(10, sh.test.size());
  expect(r, n >= 10, "needs at least 10 test images");
  AttackConfig base;
  base.epsilon = 8.0 / 255.0;
  base.alpha = 2.0 / 255.0;
  base.iters = 20;
  double pixel_ratio = 0.0, color_ratio = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const HistReport h = histogram_report(sh.std_model, sh.test[i].x, sh.test[i].y,
                                          base, derive_seed(42, i));
    pixel_ratio += h.pixel_disp.chroma / std::max(h.pixel_disp.luma, 1e-12);
    color_ratio += h.color_disp.chroma / std::max(h.color_disp.luma, 1e-12);
  }
  pixel_ratio /= static_cast<double>(n);
  color_ratio /= static_cast<double>(n);
  expect(r, color_ratio > pixel_ratio,
         "color-shift chroma/luma ratio " + num(color_ratio) +
             " not above the pixel attack's " + num(pixel_ratio));
  expect(r, color_ratio >= kColorRatioFloor,
         "color-shift chroma/luma ratio " + num(color_ratio) + " < frozen floor " +
             num(kColorRatioFloor));
  r.info = "chroma/luma: color-shift " + num(color_ratio, 2) + ", pixel " +
           num(pixel_ratio, 2);
  return r;
}

// ---- criterion 9: byte-identical CLI reruns --------------------------------

std::string mask_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!first) {
      const size_t cut = line.rfind(',');
      if (cut != std::string::npos) line.resize(cut);
    }
    first = false;
    out += line;
    out += '\n';
  }
  return out;
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream body;
    body << f.rdbuf();
    std::string bytes = body.str();
    if (e.path().filename() == "train_log.csv") bytes = mask_seconds(bytes);
    files[fs::relative(e.path(), root).string()] = std::move(bytes);
  }
  return files;
}

CheckResult c9_cli_determinism(const Shared& sh) {
  CheckResult r;
  const fs::path root = sh.root / "cli";
  fs::create_directories(root);
  const std::string data = (root / "data").string();
  const std::string model = (root / "model").string();
  const std::vector<std::string> commands = {
      "gen-data --out " + data + " --count 8 --size 16 --seed 42 --train-frac 0.75",
      "train --data " + data + " --out " + model + " --epochs 3 --batch 2",
      "attack --model " + model + " --data " + data + " --method color --out " +
          (root / "atk").string() + " --iters 3 --save-outputs",
      "eval --model " + model + " --data " + data + " --out " +
          (root / "rep").string() +
          " --iters 3 --impercept-eps 0,4 --impercept-iters 2 --save-images 1",
      "sweep --model " + model + " --data " + data + " --out " +
          (root / "swp").string() + " --eps-list 2,4 --iters-list 1,2",
  };
  const auto run_all = [&]() {
    for (const std::string& c : commands) {
      const std::string cmd = std::string(UWR_CLI_BIN) + " " + c + " > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) return c;
    }
    return std::string();
  };

  std::string failed = run_all();
  expect(r, failed.empty(), "first run failed: " + failed);
  const auto first = snapshot_tree(root);
  failed = run_all();
  expect(r, failed.empty(), "second run failed: " + failed);
  const auto second = snapshot_tree(root);

  expect(r, first.size() == second.size(),
         "file count changed between runs: " + std::to_string(first.size()) +
             " vs " + std::to_string(second.size()));
  size_t mismatches = 0;
  std::string example;
  for (const auto& [path, bytes] : first) {
    const auto it = second.find(path);
    if (it == second.end() || it->second != bytes) {
      ++mismatches;
      if (example.empty()) example = path;
    }
  }
  expect(r, mismatches == 0,
         std::to_string(mismatches) + " file(s) differ between reruns, e.g. " +
             example);
  r.info = std::to_string(first.size()) + " files compared (seconds column masked)";
  return r;
}

}  // namespace

int main() {
  const fs::path root =
      fs::temp_directory_path() / ("uwr-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(root);
  Shared sh;
  sh.root = root;

  struct Entry {
    const char* label;
    std::function<CheckResult()> fn;
  };
  const std::vector<Entry> entries = {
      {"autodiff gradients match finite differences", [&] { return c1_gradients(); }},
      {"PGD respects ball, range and channel masks", [&] { return c2_constraints(); }},
      {"perturbations stay above the PSNR floors", [&] { return c3_floors(); }},
      {"metric identities (PSNR, SSIM, YUV)", [&] { return c4_metrics(); }},
      {"standard training and the robustness gap", [&] { return c5_training(sh); }},
      {"adversarial finetuning closes the gap", [&] { return c6_finetune(sh); }},
      {"attack strength is monotone in budget", [&] { return c7_monotone(sh); }},
      {"color-shift attack moves chroma, not luma", [&] { return c8_displacement(sh); }},
      {"CLI reruns are byte-identical", [&] { return c9_cli_determinism(sh); }},
  };

  int failures = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    std::printf("[%zu/%zu] %-46s ", i + 1, entries.size(), entries[i].label);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult res;
    try {
      res = entries[i].fn();
    } catch (const std::exception& e) {
      res.pass = false;
      res.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string detail = res.info.empty() ? "" : "  [" + res.info + "]";
    std::printf("%s  (%.1fs)%s\n", res.pass ? "PASS" : "FAIL", secs, detail.c_str());
    for (const std::string& n : res.notes) std::printf("        - %s\n", n.c_str());
    std::fflush(stdout);
    if (!res.pass) ++failures;
  }

  fs::remove_all(root);
  std::printf("acceptance: %d/%zu criteria passed\n",
              static_cast<int>(entries.size()) - failures, entries.size());
  return failures > 0 ? 1 : 0;
}
