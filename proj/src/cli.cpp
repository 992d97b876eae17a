#include "uwr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uwr/attack.hpp"
#include "uwr/dataset.hpp"
#include "uwr/defense.hpp"
#include "uwr/error.hpp"
#include "uwr/eval.hpp"
#include "uwr/model.hpp"
#include "uwr/parallel.hpp"
#include "uwr/png_io.hpp"
#include "uwr/rng.hpp"

namespace uwr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Registers flags on a subcommand and mirrors them as flat JSON config keys:
/// `--config FILE` supplies defaults, inline flags override, unknown keys are
/// rejected.
class Binder {
 public:
  explicit Binder(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_,
                    "JSON config file with flag names as keys; inline flags override");
  }

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& desc) {
    CLI::Option* o = cmd_->add_option("--" + name, var, desc);
    entries_[name] = {o, [&var](const json& j) { var = j.get<T>(); },
                      [&var] { return json(var); }};
    return o;
  }

  CLI::Option* add_flag(const std::string& name, bool& var, const std::string& desc) {
    CLI::Option* o = cmd_->add_flag("--" + name, var, desc);
    entries_[name] = {o, [&var](const json& j) { var = j.get<bool>(); },
                      [&var] { return json(var); }};
    return o;
  }

  /// Overlays config-file values onto flags not given on the command line.
  void apply_config() {
    if (config_path_.empty()) return;
    std::ifstream f(config_path_);
    if (!f) throw ValidationError("cannot open config file " + config_path_);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ValidationError("config file " + config_path_ + ": " + e.what());
    }
    if (!j.is_object())
      throw ValidationError("config file root must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      const auto it = entries_.find(k);
      if (it == entries_.end()) throw ValidationError("unknown config key: " + k);
      if (it->second.opt->count() > 0) continue;  // inline flag wins
      try {
        it->second.set(v);
      } catch (const json::exception&) {
        throw ValidationError("bad value for config key " + k);
      }
    }
  }

  bool given(const std::string& name) const {
    return entries_.at(name).opt->count() > 0;
  }

  json normalized() const {
    json c = json::object();
    for (const auto& [k, e] : entries_) c[k] = e.get();
    return c;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  CLI::App* cmd_;
  std::string config_path_;
  std::map<std::string, Entry> entries_;
};

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError("invalid --" + key + ": " + what);
}

/// Runs the post-validation phase of a subcommand. Anything thrown here is a
/// runtime failure (exit 2), even error types that mean "bad config" when
/// thrown during flag validation.
template <class F>
int execute(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

AttackLoss parse_loss(const std::string& s) {
  if (s == "pixel") return AttackLoss::kPixel;
  if (s == "color" || s == "color-shift") return AttackLoss::kColorShift;
  if (s == "mse") return AttackLoss::kMse;
  throw ValidationError("invalid --attack-loss: expected mse, pixel or color");
}

Projection parse_proj(const std::string& s) {
  if (s == "cumulative") return Projection::kCumulative;
  if (s == "step-clip") return Projection::kStepClip;
  throw ValidationError("invalid --proj: expected cumulative or step-clip");
}

InitMode parse_init(const std::string& s) {
  if (s == "uniform") return InitMode::kUniform;
  if (s == "zero") return InitMode::kZero;
  throw ValidationError("invalid --init: expected uniform or zero");
}

struct MethodSpec {
  EvalMethod method = EvalMethod::kAttack;
  AttackLoss loss = AttackLoss::kPixel;
  ChannelMask mask = ChannelMask::kNone;
};

MethodSpec parse_method(const std::string& s, bool allow_none) {
  MethodSpec m;
  if (s == "pixel") return m;
  if (s == "color" || s == "color-shift") {
    m.loss = AttackLoss::kColorShift;
    return m;
  }
  if (s == "channel-r" || s == "channel-g" || s == "channel-b") {
    m.mask = s == "channel-r" ? ChannelMask::kR
                              : (s == "channel-g" ? ChannelMask::kG : ChannelMask::kB);
    return m;
  }
  if (s == "gaussian") {
    m.method = EvalMethod::kGaussian;
    return m;
  }
  if (s == "uniform") {
    m.method = EvalMethod::kUniform;
    return m;
  }
  if (allow_none && s == "none") {
    m.method = EvalMethod::kNone;
    return m;
  }
  throw ValidationError(
      "invalid --method: expected pixel, color, channel-r, channel-g, "
      "channel-b, gaussian or uniform" + std::string(allow_none ? ", none" : ""));
}

void reject_attack_flags_for_noise(const Binder& b, const std::string& method) {
  for (const char* key : {"alpha", "iters", "proj", "init"})
    if (b.given(key))
      throw ValidationError("invalid --" + std::string(key) +
                            ": not applicable to noise method " + method);
}

json base_meta(const std::string& command, const Binder& b) {
  json meta;
  meta["command"] = command;
  meta["config"] = b.normalized();
  meta["conventions"] = {
      {"eps_alpha_units", "1/255"},
      {"gaussian_noise", "sigma = epsilon"},
      {"ssim", "channel-averaged, 11x11 gaussian window, valid crop"},
      {"yuv", "BT.601 analog (Y 0.299/0.587/0.114, U 0.492(B-Y), V 0.877(R-Y))"},
  };
  return meta;
}

// ---- gen-data ----------------------------------------------------------

int run_gen_data(const Binder& b, const std::string& out, int count, int size,
                 uint64_t seed, const std::string& water, bool blur,
                 double noise_sigma, double dmin, double dmax, double train_frac,
                 unsigned jobs) {
  check(count >= 1, "count", "must be >= 1");
  check(size >= 16, "size", "must be >= 16");
  check(train_frac >= 0.0 && train_frac <= 1.0, "train-frac", "must lie in [0,1]");
  check(noise_sigma >= 0.0, "noise-sigma", "must be >= 0");
  check(dmin >= 0.0 && dmax >= dmin, "dmin", "depth range must be ordered and >= 0");
  DegradationParams p = water_preset(water);
  p.blur = blur;
  p.noise_sigma = noise_sigma;
  p.d_min = dmin;
  p.d_max = dmax;
  p.validate();

  return execute([&] {
    generate_dataset(out, count, size, p, seed, train_frac, jobs);
    json meta = base_meta("gen-data", b);
    write_meta_json((fs::path(out) / "meta.json").string(), meta);
    std::cout << "wrote " << count << " pairs to " << out << "\n";
    return 0;
  });
}

// ---- train -------------------------------------------------------------

int run_train(const Binder& b, const std::string& data, const std::string& out,
              const std::string& arch, uint64_t model_seed,
              const std::string& resume, int epochs, int batch, double lr,
              bool adv, double eps255, double alpha255, int iters, double lambda,
              const std::string& attack_loss, const std::string& proj,
              const std::string& init, uint64_t seed, unsigned jobs) {
  check(epochs >= 1, "epochs", "must be >= 1");
  check(batch >= 1, "batch", "must be >= 1");
  check(lr > 0.0, "lr", "must be > 0");
  check(eps255 >= 0.0 && eps255 <= 64.0, "eps", "must lie in [0, 64] (1/255 units)");
  check(alpha255 >= 0.0 && alpha255 <= 64.0, "alpha", "must lie in [0, 64] (1/255 units)");
  check(iters >= 1 && iters <= 1000, "iters", "must lie in [1, 1000]");
  check(lambda >= 0.0, "lambda", "must be >= 0");
  check(arch == "tiny-enhancer" || arch == "affine", "arch",
        "expected tiny-enhancer or affine");

  TrainConfig cfg;
  cfg.mode = adv ? TrainMode::kAdversarial : TrainMode::kStandard;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.lr = lr;
  cfg.lambda = lambda;
  cfg.seed = seed;
  cfg.jobs = jobs;
  cfg.checkpoint_out = out;
  cfg.inner.epsilon = eps255 / 255.0;
  cfg.inner.alpha = alpha255 / 255.0;
  cfg.inner.iters = iters;
  cfg.inner.loss = parse_loss(attack_loss);
  cfg.inner.projection = parse_proj(proj);
  cfg.inner.init = parse_init(init);
  cfg.validate();

  return execute([&] {
    const PairedDataset ds = load_paired_dir(data);
    const std::vector<LoadedPair> pairs = load_pairs(ds, "train");

    Model m = resume.empty()
                  ? (arch == "affine" ? build_affine({1, 1, 1}, {0, 0, 0})
                                      : build_tiny_enhancer(model_seed))
                  : load_checkpoint(resume);
    const TrainLog log = train(m, pairs, cfg);
    write_train_log(log, (fs::path(out) / "train_log.csv").string());

    json meta = base_meta("train", b);
    meta["checkpoint_digest"] = file_digest((fs::path(out) / "model.bin").string());
    write_meta_json((fs::path(out) / "meta.json").string(), meta);
    std::cout << "trained " << m.architecture << " for " << epochs
              << " epochs; final l_model="
              << format_csv_double(log.epochs.back().l_model) << "\n";
    return 0;
  });
}

// ---- attack ------------------------------------------------------------

int run_attack(const Binder& b, const std::string& model_dir,
               const std::string& image, const std::string& target,
               const std::string& data, const std::string& out,
               const std::string& method, double eps255, double alpha255,
               int iters, const std::string& proj, const std::string& init,
               uint64_t seed, unsigned jobs, bool save_outputs) {
  check(!out.empty(), "out", "output directory required");
  if (image.empty() == data.empty())
    throw ValidationError("exactly one of --image and --data is required");
  check(eps255 >= 0.0 && eps255 <= 64.0, "eps", "must lie in [0, 64] (1/255 units)");
  check(alpha255 >= 0.0 && alpha255 <= 64.0, "alpha", "must lie in [0, 64] (1/255 units)");
  check(iters >= 1 && iters <= 1000, "iters", "must lie in [1, 1000]");
  const MethodSpec spec = parse_method(method, /*allow_none=*/false);
  const bool is_noise = spec.method != EvalMethod::kAttack;
  if (is_noise) reject_attack_flags_for_noise(b, method);

  AttackConfig cfg;
  cfg.epsilon = eps255 / 255.0;
  cfg.alpha = alpha255 / 255.0;
  cfg.iters = iters;
  cfg.loss = spec.loss;
  cfg.mask = spec.mask;
  cfg.projection = parse_proj(proj);
  cfg.init = parse_init(init);
  if (!is_noise) cfg.validate();

  return execute([&] {
    const Model m = load_checkpoint(model_dir);

    struct Item {
      std::string name;
      Image x, y;
    };
    std::vector<Item> items;
    if (!image.empty()) {
      Item it;
      it.name = fs::path(image).filename().string();
      it.x = load_png(image);
      it.y = target.empty() ? m.forward(it.x) : load_png(target);
      items.push_back(std::move(it));
    } else {
      const PairedDataset ds = load_paired_dir(data);
      for (LoadedPair& p : load_pairs(ds, "test")) {
        Item it;
        it.name = p.name;
        it.x = std::move(p.x);
        it.y = std::move(p.y);
        items.push_back(std::move(it));
      }
    }

    fs::create_directories(fs::path(out) / "adv");
    if (save_outputs) {
      fs::create_directories(fs::path(out) / "enhanced_clean");
      fs::create_directories(fs::path(out) / "enhanced_adv");
    }
    parallel_for(items.size(), jobs, [&](size_t i) {
      const Item& it = items[i];
      Image x_adv;
      if (spec.method == EvalMethod::kAttack) {
        AttackConfig c = cfg;
        c.seed = derive_seed(seed, i);
        x_adv = pgd_attack(m, it.x, it.y, c).x_adv;
      } else {
        x_adv = random_noise(it.x,
                             spec.method == EvalMethod::kGaussian ? NoiseKind::kGaussian
                                                                  : NoiseKind::kUniform,
                             cfg.epsilon, derive_seed(seed, i));
      }
      save_png((fs::path(out) / "adv" / it.name).string(), x_adv);
      if (save_outputs) {
        save_png((fs::path(out) / "enhanced_clean" / it.name).string(), m.forward(it.x));
        save_png((fs::path(out) / "enhanced_adv" / it.name).string(), m.forward(x_adv));
      }
    });

    json meta = base_meta("attack", b);
    meta["checkpoint_digest"] = file_digest((fs::path(model_dir) / "model.bin").string());
    write_meta_json((fs::path(out) / "meta.json").string(), meta);
    std::cout << "attacked " << items.size() << " image(s) -> " << out << "/adv\n";
    return 0;
  });
}

// ---- eval --------------------------------------------------------------

int run_eval(const Binder& b, const std::string& model_dir, const std::string& data,
             const std::string& out, const std::string& method, double eps255,
             double alpha255, int iters, const std::string& proj,
             const std::string& init, const std::vector<double>& impercept_eps,
             int impercept_iters, int save_images, uint64_t seed, unsigned jobs) {
  check(eps255 >= 0.0 && eps255 <= 64.0, "eps", "must lie in [0, 64] (1/255 units)");
  check(alpha255 >= 0.0 && alpha255 <= 64.0, "alpha", "must lie in [0, 64] (1/255 units)");
  check(iters >= 1 && iters <= 1000, "iters", "must lie in [1, 1000]");
  check(impercept_iters >= 1 && impercept_iters <= 1000, "impercept-iters",
        "must lie in [1, 1000]");
  for (const double e : impercept_eps)
    check(e >= 0.0 && e <= 64.0, "impercept-eps", "entries must lie in [0, 64]");
  check(save_images >= 0, "save-images", "must be >= 0");
  const MethodSpec spec = parse_method(method, /*allow_none=*/true);
  if (spec.method != EvalMethod::kAttack) {
    reject_attack_flags_for_noise(b, method);
    if (spec.method == EvalMethod::kNone && b.given("eps"))
      throw ValidationError("invalid --eps: not applicable to method none");
  }

  EvalConfig cfg;
  cfg.method = spec.method;
  cfg.attack.epsilon = eps255 / 255.0;
  cfg.attack.alpha = alpha255 / 255.0;
  cfg.attack.iters = iters;
  cfg.attack.loss = spec.loss;
  cfg.attack.mask = spec.mask;
  cfg.attack.projection = parse_proj(proj);
  cfg.attack.init = parse_init(init);
  cfg.noise_epsilon = eps255 / 255.0;
  cfg.seed = seed;
  cfg.jobs = jobs;

  std::vector<double> eps_fracs;
  for (const double e : impercept_eps) eps_fracs.push_back(e / 255.0);
  const AttackLoss imp_loss =
      spec.method == EvalMethod::kAttack ? spec.loss : AttackLoss::kPixel;

  return execute([&] {
    const Model m = load_checkpoint(model_dir);
    const PairedDataset ds = load_paired_dir(data);
    const std::vector<LoadedPair> pairs = load_pairs(ds, "test");

    fs::create_directories(out);
    const RobustnessReport rep = evaluate(m, pairs, cfg);
    write_per_image_csv((fs::path(out) / "per_image.csv").string(), rep);
    write_summary_csv((fs::path(out) / "summary.csv").string(), rep);

    const NoiseStudy noise = noise_compare(m, pairs, cfg.attack, seed, jobs);
    write_noise_csv((fs::path(out) / "noise.csv").string(), noise);

    const HistReport hist =
        histogram_report(m, pairs[0].x, pairs[0].y, cfg.attack, derive_seed(seed, 0));
    write_hist_csv((fs::path(out) / "hist.csv").string(), pairs[0].name, hist);

    const std::vector<ImperceptRow> imp = imperceptibility_report(
        m, pairs, eps_fracs, impercept_iters, cfg.attack.projection,
        cfg.attack.alpha, imp_loss, cfg.attack.init, seed, jobs);
    write_impercept_csv((fs::path(out) / "impercept.csv").string(), imp);

    if (save_images > 0) {
      fs::create_directories(fs::path(out) / "images");
      const int k = std::min<int>(save_images, static_cast<int>(pairs.size()));
      for (int i = 0; i < k; ++i) {
        Image x_adv;
        if (cfg.method == EvalMethod::kAttack) {
          AttackConfig a = cfg.attack;
          a.seed = derive_seed(seed, i);
          x_adv = pgd_attack(m, pairs[i].x, pairs[i].y, a).x_adv;
        } else if (cfg.method == EvalMethod::kNone) {
          x_adv = pairs[i].x;
        } else {
          x_adv = random_noise(pairs[i].x,
                               cfg.method == EvalMethod::kGaussian ? NoiseKind::kGaussian
                                                                   : NoiseKind::kUniform,
                               cfg.noise_epsilon, derive_seed(seed, i));
        }
        const std::string stem = fs::path(pairs[i].name).stem().string();
        const fs::path d = fs::path(out) / "images";
        save_png((d / (stem + "_x.png")).string(), pairs[i].x);
        save_png((d / (stem + "_xadv.png")).string(), x_adv);
        save_png((d / (stem + "_fx.png")).string(), m.forward(pairs[i].x));
        save_png((d / (stem + "_fxadv.png")).string(), m.forward(x_adv));
      }
    }

    json meta = base_meta("eval", b);
    meta["checkpoint_digest"] = file_digest((fs::path(model_dir) / "model.bin").string());
    meta["histogram_analysis"] = {
        {"image", pairs[0].name},
        {"pixel",
         {{"luma_disp", hist.pixel_disp.luma}, {"chroma_disp", hist.pixel_disp.chroma}}},
        {"color_shift",
         {{"luma_disp", hist.color_disp.luma}, {"chroma_disp", hist.color_disp.chroma}}},
    };
    write_meta_json((fs::path(out) / "meta.json").string(), meta);
    std::cout << "evaluated " << pairs.size() << " pairs (" << method
              << "): mean psnr_clean=" << format_csv_double(rep.psnr_clean.mean)
              << " mean psnr_adv=" << format_csv_double(rep.psnr_adv.mean) << "\n";
    return 0;
  });
}

// ---- sweep -------------------------------------------------------------

int run_sweep(const Binder& b, const std::string& model_dir, const std::string& data,
              const std::string& out, const std::vector<double>& eps_list,
              const std::vector<int>& iters_list, double alpha255,
              const std::string& loss, const std::string& proj, uint64_t seed,
              unsigned jobs) {
  check(!eps_list.empty(), "eps-list", "must be non-empty");
  check(!iters_list.empty(), "iters-list", "must be non-empty");
  for (const double e : eps_list)
    check(e >= 0.0 && e <= 64.0, "eps-list", "entries must lie in [0, 64]");
  for (const int t : iters_list)
    check(t >= 1 && t <= 1000, "iters-list", "entries must lie in [1, 1000]");
  check(alpha255 >= 0.0 && alpha255 <= 64.0, "alpha", "must lie in [0, 64] (1/255 units)");
  const AttackLoss loss_kind = parse_loss(loss);
  const Projection proj_kind = parse_proj(proj);

  std::vector<double> eps_fracs;
  for (const double e : eps_list) eps_fracs.push_back(e / 255.0);

  return execute([&] {
    const Model m = load_checkpoint(model_dir);
    const PairedDataset ds = load_paired_dir(data);
    const std::vector<LoadedPair> pairs = load_pairs(ds, "test");

    const SweepGrid grid = sweep(m, pairs, eps_fracs, iters_list, alpha255 / 255.0,
                                 loss_kind, proj_kind, seed, jobs);

    fs::create_directories(out);
    write_sweep_csv((fs::path(out) / "sweep.csv").string(), grid);
    json meta = base_meta("sweep", b);
    meta["checkpoint_digest"] = file_digest((fs::path(model_dir) / "model.bin").string());
    write_meta_json((fs::path(out) / "meta.json").string(), meta);
    std::cout << "swept " << grid.cells.size() << " cells -> " << out << "/sweep.csv\n";
    return 0;
  });
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"adversarial-robustness workbench for small underwater image enhancers"};
  app.require_subcommand(1);

  // gen-data
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic paired dataset");
  Binder gb(gen);
  std::string g_out;
  int g_count = 240, g_size = 64;
  uint64_t g_seed = 42;
  std::string g_water = "II";
  bool g_blur = false;
  double g_sigma = 0.01, g_dmin = 0.3, g_dmax = 1.2, g_frac = 0.8;
  unsigned g_jobs = 1;
  gb.add("out", g_out, "output dataset directory")->required();
  gb.add("count", g_count, "number of image pairs");
  gb.add("size", g_size, "image side length (>= 16)");
  gb.add("seed", g_seed, "base seed");
  gb.add("water", g_water, "water preset: I, II or III");
  gb.add_flag("blur", g_blur, "apply 3x3 box blur");
  gb.add("noise-sigma", g_sigma, "sensor noise standard deviation");
  gb.add("dmin", g_dmin, "minimum depth");
  gb.add("dmax", g_dmax, "maximum depth");
  gb.add("train-frac", g_frac, "fraction of pairs in the train split");
  gb.add("jobs", g_jobs, "parallel workers (0 = all cores)");

  // train
  CLI::App* tr = app.add_subcommand("train", "train or finetune a model");
  Binder tb(tr);
  std::string t_data, t_out, t_arch = "tiny-enhancer", t_resume;
  uint64_t t_model_seed = 7, t_seed = 42;
  int t_epochs = 50, t_batch = 6, t_iters = 20;
  double t_lr = 1e-3, t_eps = 8, t_alpha = 2, t_lambda = 1.0;
  bool t_adv = false;
  std::string t_attack_loss = "mse", t_proj = "cumulative", t_init = "uniform";
  unsigned t_jobs = 1;
  tb.add("data", t_data, "paired dataset directory")->required();
  tb.add("out", t_out, "checkpoint output directory")->required();
  tb.add("arch", t_arch, "architecture: tiny-enhancer or affine");
  tb.add("model-seed", t_model_seed, "weight initialization seed");
  tb.add("resume", t_resume, "checkpoint directory to finetune from");
  tb.add("epochs", t_epochs, "training epochs");
  tb.add("batch", t_batch, "batch size");
  tb.add("lr", t_lr, "Adam learning rate");
  tb.add_flag("adv", t_adv, "adversarial training mode");
  tb.add("eps", t_eps, "inner-attack epsilon (1/255 units)");
  tb.add("alpha", t_alpha, "inner-attack step size (1/255 units)");
  tb.add("iters", t_iters, "inner-attack iterations");
  tb.add("lambda", t_lambda, "adversarial regularization coefficient");
  tb.add("attack-loss", t_attack_loss, "inner-attack loss: mse, pixel or color");
  tb.add("proj", t_proj, "inner-attack projection: cumulative or step-clip");
  tb.add("init", t_init, "inner-attack init: uniform or zero");
  tb.add("seed", t_seed, "training seed (shuffling, attack streams)");
  tb.add("jobs", t_jobs, "parallel workers (0 = all cores)");

  // attack
  CLI::App* at = app.add_subcommand("attack", "attack one image or a dataset's test split");
  Binder ab(at);
  std::string a_model, a_image, a_target, a_data, a_out, a_method;
  double a_eps = 8, a_alpha = 2;
  int a_iters = 20;
  std::string a_proj = "cumulative", a_init = "uniform";
  uint64_t a_seed = 42;
  unsigned a_jobs = 1;
  bool a_save_outputs = false;
  ab.add("model", a_model, "checkpoint directory")->required();
  ab.add("image", a_image, "single input PNG");
  ab.add("target", a_target, "ground-truth PNG for --image (default: the clean output)");
  ab.add("data", a_data, "paired dataset directory (test split)");
  ab.add("out", a_out, "output directory")->required();
  ab.add("method", a_method,
         "pixel, color, channel-r, channel-g, channel-b, gaussian or uniform")
      ->required();
  ab.add("eps", a_eps, "epsilon (1/255 units)");
  ab.add("alpha", a_alpha, "step size (1/255 units)");
  ab.add("iters", a_iters, "iterations");
  ab.add("proj", a_proj, "projection: cumulative or step-clip");
  ab.add("init", a_init, "init: uniform or zero");
  ab.add("seed", a_seed, "base seed");
  ab.add("jobs", a_jobs, "parallel workers (0 = all cores)");
  ab.add_flag("save-outputs", a_save_outputs, "also save enhanced outputs");

  // eval
  CLI::App* ev = app.add_subcommand("eval", "robustness report on a dataset's test split");
  Binder eb(ev);
  std::string e_model, e_data, e_out, e_method = "pixel";
  double e_eps = 8, e_alpha = 2;
  int e_iters = 20, e_impercept_iters = 5, e_save_images = 0;
  std::string e_proj = "cumulative", e_init = "uniform";
  std::vector<double> e_impercept_eps = {1, 2, 4, 8};
  uint64_t e_seed = 42;
  unsigned e_jobs = 1;
  eb.add("model", e_model, "checkpoint directory")->required();
  eb.add("data", e_data, "paired dataset directory")->required();
  eb.add("out", e_out, "report output directory")->required();
  eb.add("method", e_method,
         "pixel, color, channel-r/g/b, gaussian, uniform or none");
  eb.add("eps", e_eps, "epsilon (1/255 units)");
  eb.add("alpha", e_alpha, "step size (1/255 units)");
  eb.add("iters", e_iters, "iterations");
  eb.add("proj", e_proj, "projection: cumulative or step-clip");
  eb.add("init", e_init, "init: uniform or zero");
  eb.add("impercept-eps", e_impercept_eps, "imperceptibility epsilon list (1/255 units)")
      ->delimiter(',');
  eb.add("impercept-iters", e_impercept_iters, "imperceptibility iterations");
  eb.add("save-images", e_save_images, "save PNG panels for the first N pairs");
  eb.add("seed", e_seed, "base seed");
  eb.add("jobs", e_jobs, "parallel workers (0 = all cores)");

  // sweep
  CLI::App* sw = app.add_subcommand("sweep", "epsilon x iterations grid of mean PSNR/SSIM");
  Binder sb(sw);
  std::string s_model, s_data, s_out, s_loss = "pixel", s_proj = "cumulative";
  std::vector<double> s_eps = {1, 2, 4, 8};
  std::vector<int> s_iters = {1, 5, 10, 15, 20};
  double s_alpha = 2;
  uint64_t s_seed = 42;
  unsigned s_jobs = 1;
  sb.add("model", s_model, "checkpoint directory")->required();
  sb.add("data", s_data, "paired dataset directory")->required();
  sb.add("out", s_out, "report output directory")->required();
  sb.add("eps-list", s_eps, "epsilon grid (1/255 units)")->delimiter(',');
  sb.add("iters-list", s_iters, "iteration grid")->delimiter(',');
  sb.add("alpha", s_alpha, "step size (1/255 units)");
  sb.add("loss", s_loss, "attack loss: pixel, color or mse");
  sb.add("proj", s_proj, "projection: cumulative or step-clip");
  sb.add("seed", s_seed, "base seed");
  sb.add("jobs", s_jobs, "parallel workers (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(gen)) {
      gb.apply_config();
      return run_gen_data(gb, g_out, g_count, g_size, g_seed, g_water, g_blur,
                          g_sigma, g_dmin, g_dmax, g_frac, g_jobs);
    }
    if (app.got_subcommand(tr)) {
      tb.apply_config();
      return run_train(tb, t_data, t_out, t_arch, t_model_seed, t_resume, t_epochs,
                       t_batch, t_lr, t_adv, t_eps, t_alpha, t_iters, t_lambda,
                       t_attack_loss, t_proj, t_init, t_seed, t_jobs);
    }
    if (app.got_subcommand(at)) {
      ab.apply_config();
      return run_attack(ab, a_model, a_image, a_target, a_data, a_out, a_method,
                        a_eps, a_alpha, a_iters, a_proj, a_init, a_seed, a_jobs,
                        a_save_outputs);
    }
    if (app.got_subcommand(ev)) {
      eb.apply_config();
      return run_eval(eb, e_model, e_data, e_out, e_method, e_eps, e_alpha,
                      e_iters, e_proj, e_init, e_impercept_eps, e_impercept_iters,
                      e_save_images, e_seed, e_jobs);
    }
    if (app.got_subcommand(sw)) {
      sb.apply_config();
      return run_sweep(sb, s_model, s_data, s_out, s_eps, s_iters, s_alpha, s_loss,
                       s_proj, s_seed, s_jobs);
    }
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace uwr
