#include "uwr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "uwr/color.hpp"
#include "uwr/error.hpp"
#include "uwr/parallel.hpp"
#include "uwr/rng.hpp"

namespace uwr {

std::string EvalConfig::method_name() const {
  switch (method) {
    case EvalMethod::kGaussian: return "gaussian";
    case EvalMethod::kUniform: return "uniform";
    case EvalMethod::kNone: return "none";
    case EvalMethod::kAttack: break;
  }
  if (attack.mask != ChannelMask::kNone) return "channel-" + to_string(attack.mask);
  return to_string(attack.loss);
}

namespace {

void accumulate(ColumnStat& s, double v) {
  s.mean += v;
  s.finite += 1;
}

void accumulate(ColumnStat& s, const PsnrResult& v) {
  if (v.infinite)
    s.infinite += 1;
  else
    accumulate(s, v.value);
}

void finalize(ColumnStat& s) {
  if (s.finite > 0) s.mean /= static_cast<double>(s.finite);
}

}  // namespace

RobustnessReport evaluate(const Model& m, const std::vector<LoadedPair>& pairs,
                          const EvalConfig& cfg) {
  if (pairs.empty()) throw ValidationError("evaluate: empty test split");
  if (cfg.method == EvalMethod::kAttack) cfg.attack.validate();
  if (cfg.method == EvalMethod::kGaussian || cfg.method == EvalMethod::kUniform)
    if (cfg.noise_epsilon < 0) throw ValidationError("evaluate: negative noise epsilon");

  RobustnessReport rep;
  rep.rows.resize(pairs.size());
  parallel_for(pairs.size(), cfg.jobs, [&](size_t i) {
    const LoadedPair& p = pairs[i];
    const uint64_t seed_i = derive_seed(cfg.seed, i);
    EvalRow row;
    row.image = p.name;
    row.method = cfg.method_name();

    const Image f_x = m.forward(p.x);
    Image x_adv(1, 1);
    switch (cfg.method) {
      case EvalMethod::kAttack: {
        AttackConfig a = cfg.attack;
        a.seed = seed_i;
        x_adv = pgd_attack(m, p.x, p.y, a).x_adv;
        row.eps255 = a.epsilon * 255.0;
        row.alpha255 = a.alpha * 255.0;
        row.iters = a.iters;
        row.projection = to_string(a.projection);
        break;
      }
      case EvalMethod::kGaussian:
      case EvalMethod::kUniform:
        x_adv = random_noise(p.x,
                             cfg.method == EvalMethod::kGaussian ? NoiseKind::kGaussian
                                                                 : NoiseKind::kUniform,
                             cfg.noise_epsilon, seed_i);
        row.eps255 = cfg.noise_epsilon * 255.0;
        break;
      case EvalMethod::kNone:
        x_adv = p.x;
        break;
    }
    const Image f_adv = m.forward(x_adv);

    row.psnr_clean = psnr(f_x, p.y);
    row.ssim_clean = ssim(f_x, p.y);
    row.psnr_adv = psnr(f_adv, p.y);
    row.ssim_adv = ssim(f_adv, p.y);
    row.psnr_x_xadv = psnr(p.x, x_adv);
    rep.rows[i] = std::move(row);
  });

  for (const EvalRow& r : rep.rows) {
    accumulate(rep.psnr_clean, r.psnr_clean);
    accumulate(rep.ssim_clean, r.ssim_clean);
    accumulate(rep.psnr_adv, r.psnr_adv);
    accumulate(rep.ssim_adv, r.ssim_adv);
    accumulate(rep.psnr_x_xadv, r.psnr_x_xadv);
  }
  finalize(rep.psnr_clean);
  finalize(rep.ssim_clean);
  finalize(rep.psnr_adv);
  finalize(rep.ssim_adv);
  finalize(rep.psnr_x_xadv);
  return rep;
}

SweepGrid sweep(const Model& m, const std::vector<LoadedPair>& pairs,
                const std::vector<double>& eps_list, const std::vector<int>& t_list,
                double alpha, AttackLoss loss, Projection projection,
                uint64_t seed, unsigned jobs) {
  if (eps_list.empty() || t_list.empty())
    throw ValidationError("sweep: empty epsilon or iteration list");
  SweepGrid g;
  for (const double eps : eps_list)
    for (const int t : t_list) {
      EvalConfig cfg;
      cfg.method = EvalMethod::kAttack;
      cfg.attack.epsilon = eps;
      cfg.attack.alpha = alpha;
      cfg.attack.iters = t;
      cfg.attack.loss = loss;
      cfg.attack.projection = projection;
      cfg.seed = seed;
      cfg.jobs = jobs;
      const RobustnessReport r = evaluate(m, pairs, cfg);
      g.cells.push_back({eps * 255.0, t, r.psnr_adv.mean, r.ssim_adv.mean});
    }
  return g;
}

NoiseStudy noise_compare(const Model& m, const std::vector<LoadedPair>& pairs,
                         const AttackConfig& adv, uint64_t seed, unsigned jobs) {
  NoiseStudy s;
  s.names = {"adversarial", "gaussian", "uniform", "none"};
  for (const std::string& name : s.names) {
    EvalConfig cfg;
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.attack = adv;
    cfg.noise_epsilon = adv.epsilon;
    if (name == "adversarial")
      cfg.method = EvalMethod::kAttack;
    else if (name == "gaussian")
      cfg.method = EvalMethod::kGaussian;
    else if (name == "uniform")
      cfg.method = EvalMethod::kUniform;
    else
      cfg.method = EvalMethod::kNone;
    s.conditions.push_back(evaluate(m, pairs, cfg));
  }
  return s;
}

namespace {

DisplacementStats displacement(const Image& base_out, const Image& adv_out) {
  const Image a = rgb_to_yuv(base_out);
  const Image b = rgb_to_yuv(adv_out);
  const long n = a.pixels();
  double sums[3] = {0, 0, 0};
  for (int c = 0; c < 3; ++c) {
    const double* pa = a.data.data() + c * n;
    const double* pb = b.data.data() + c * n;
    for (long i = 0; i < n; ++i) sums[c] += std::fabs(pa[i] - pb[i]);
  }
  DisplacementStats d;
  d.luma = sums[0] / n;
  d.chroma = (sums[1] + sums[2]) / n;
  return d;
}

}  // namespace

HistReport histogram_report(const Model& m, const Image& x, const Image& y,
                            const AttackConfig& base, uint64_t seed) {
  AttackConfig pixel_cfg = base;
  pixel_cfg.loss = AttackLoss::kPixel;
  pixel_cfg.mask = ChannelMask::kNone;
  pixel_cfg.seed = seed;
  AttackConfig color_cfg = pixel_cfg;
  color_cfg.loss = AttackLoss::kColorShift;

  const Image f_x = m.forward(x);
  const Image f_pixel = m.forward(pgd_attack(m, x, y, pixel_cfg).x_adv);
  const Image f_color = m.forward(pgd_attack(m, x, y, color_cfg).x_adv);

  HistReport h;
  h.clean = histogram256(f_x);
  h.pixel = histogram256(f_pixel);
  h.color = histogram256(f_color);
  h.pixel_disp = displacement(f_x, f_pixel);
  h.color_disp = displacement(f_x, f_color);
  return h;
}

std::vector<ImperceptRow> imperceptibility_report(
    const Model& m, const std::vector<LoadedPair>& pairs,
    const std::vector<double>& eps_list, int iters, Projection projection,
    double alpha, AttackLoss loss, InitMode init, uint64_t seed, unsigned jobs) {
  if (pairs.empty()) throw ValidationError("imperceptibility_report: empty test split");
  std::vector<ImperceptRow> rows;
  for (const double eps : eps_list) {
    std::vector<PsnrResult> vals(pairs.size());
    parallel_for(pairs.size(), jobs, [&](size_t i) {
      AttackConfig a;
      a.epsilon = eps;
      a.alpha = alpha;
      a.iters = iters;
      a.loss = loss;
      a.projection = projection;
      a.init = init;
      a.seed = derive_seed(seed, i);
      const Image x_adv = pgd_attack(m, pairs[i].x, pairs[i].y, a).x_adv;
      vals[i] = psnr(pairs[i].x, x_adv);
    });
    ImperceptRow row;
    row.eps255 = eps * 255.0;
    row.iters = iters;
    row.projection = to_string(projection);
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    long finite = 0;
    for (const PsnrResult& v : vals) {
      if (v.infinite) {
        row.infinite += 1;
        continue;
      }
      sum += v.value;
      lo = std::min(lo, v.value);
      finite += 1;
    }
    if (finite > 0) {
      row.mean_psnr = sum / static_cast<double>(finite);
      row.min_psnr = lo;
    } else {
      row.mean_psnr = std::numeric_limits<double>::infinity();
      row.min_psnr = std::numeric_limits<double>::infinity();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_csv_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_psnr(const PsnrResult& v) {
  if (v.infinite) return "inf";
  return format_csv_double(v.value);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_row(std::ofstream& f, const EvalRow& r) {
  f << r.image << ',' << r.method << ',' << format_csv_double(r.eps255) << ','
    << format_csv_double(r.alpha255) << ',' << r.iters << ',' << r.projection << ','
    << format_psnr(r.psnr_clean) << ',' << format_csv_double(r.ssim_clean) << ','
    << format_psnr(r.psnr_adv) << ',' << format_csv_double(r.ssim_adv) << ','
    << format_psnr(r.psnr_x_xadv) << '\n';
}

constexpr const char* kRowHeader =
    "image,method,eps,alpha,iters,projection,psnr_clean,ssim_clean,"
    "psnr_adv,ssim_adv,psnr_x_xadv";

// Linearly interpolated quantile of a sorted vector.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void write_per_image_csv(const std::string& path, const RobustnessReport& r) {
  std::ofstream f = open_out(path);
  f << kRowHeader << '\n';
  for (const EvalRow& row : r.rows) write_row(f, row);
}

void write_summary_csv(const std::string& path, const RobustnessReport& r) {
  std::ofstream f = open_out(path);
  f << "metric,mean,finite_count,infinite_count\n";
  const auto line = [&](const char* name, const ColumnStat& s) {
    f << name << ',' << (s.finite > 0 ? format_csv_double(s.mean) : "inf") << ','
      << s.finite << ',' << s.infinite << '\n';
  };
  line("psnr_clean", r.psnr_clean);
  line("ssim_clean", r.ssim_clean);
  line("psnr_adv", r.psnr_adv);
  line("ssim_adv", r.ssim_adv);
  line("psnr_x_xadv", r.psnr_x_xadv);
}

void write_sweep_csv(const std::string& path, const SweepGrid& g) {
  std::ofstream f = open_out(path);
  f << "eps,iters,mean_psnr_adv,mean_ssim_adv\n";
  for (const SweepCell& c : g.cells)
    f << format_csv_double(c.eps255) << ',' << c.iters << ','
      << format_csv_double(c.mean_psnr_adv) << ','
      << format_csv_double(c.mean_ssim_adv) << '\n';
}

void write_noise_csv(const std::string& path, const NoiseStudy& s) {
  std::ofstream f = open_out(path);
  f << "method,image,psnr_out,ssim_out\n";
  for (size_t c = 0; c < s.conditions.size(); ++c) {
    const RobustnessReport& r = s.conditions[c];
    std::vector<double> psnrs, ssims;
    for (const EvalRow& row : r.rows) {
      f << s.names[c] << ',' << row.image << ',' << format_psnr(row.psnr_adv) << ','
        << format_csv_double(row.ssim_adv) << '\n';
      if (!row.psnr_adv.infinite) psnrs.push_back(row.psnr_adv.value);
      ssims.push_back(row.ssim_adv);
    }
    std::sort(psnrs.begin(), psnrs.end());
    std::sort(ssims.begin(), ssims.end());
    const char* qnames[5] = {"quartile:min", "quartile:q1", "quartile:median",
                             "quartile:q3", "quartile:max"};
    const double qs[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int qi = 0; qi < 5; ++qi)
      f << s.names[c] << ',' << qnames[qi] << ','
        << format_csv_double(quantile(psnrs, qs[qi])) << ','
        << format_csv_double(quantile(ssims, qs[qi])) << '\n';
  }
}

void write_hist_csv(const std::string& path, const std::string& image,
                    const HistReport& h) {
  std::ofstream f = open_out(path);
  f << "image,condition,channel,bin,count\n";
  const char* channels[3] = {"R", "G", "B"};
  const std::pair<const char*, const Histogram256*> conds[3] = {
      {"clean", &h.clean}, {"pixel", &h.pixel}, {"color-shift", &h.color}};
  for (const auto& [name, hist] : conds)
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 256; ++b)
        f << image << ',' << name << ',' << channels[c] << ',' << b << ','
          << hist->bins[c][b] << '\n';
}

void write_impercept_csv(const std::string& path,
                         const std::vector<ImperceptRow>& rows) {
  std::ofstream f = open_out(path);
  f << "eps,iters,projection,mean_psnr_x_xadv,min_psnr_x_xadv,infinite_count\n";
  for (const ImperceptRow& r : rows)
    f << format_csv_double(r.eps255) << ',' << r.iters << ',' << r.projection << ','
      << format_csv_double(r.mean_psnr) << ',' << format_csv_double(r.min_psnr)
      << ',' << r.infinite << '\n';
}

void write_meta_json(const std::string& path, const nlohmann::json& meta) {
  std::ofstream f = open_out(path);
  f << meta.dump(2) << "\n";
}

}  // namespace uwr
