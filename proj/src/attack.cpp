#include "uwr/attack.hpp"

#include <algorithm>
#include <cmath>

#include "uwr/color.hpp"
#include "uwr/error.hpp"
#include "uwr/rng.hpp"

namespace uwr {

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ValidationError("attack: epsilon must lie in [0,1]");
  if (!(alpha >= 0.0)) throw ValidationError("attack: alpha must be >= 0");
  if (iters < 1) throw ValidationError("attack: iters must be >= 1");
}

namespace {

void require_same_shape(const Image& a, const Image& b, const char* who) {
  if (!a.same_shape(b)) throw ValidationError(std::string(who) + ": shape mismatch");
}

double channel_l2(const Image& a, const Image& b, int c) {
  const long n = a.pixels();
  const double* pa = a.data.data() + static_cast<long>(c) * n;
  const double* pb = b.data.data() + static_cast<long>(c) * n;
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

int mask_channel(ChannelMask m) {
  switch (m) {
    case ChannelMask::kR: return 0;
    case ChannelMask::kG: return 1;
    case ChannelMask::kB: return 2;
    case ChannelMask::kNone: break;
  }
  return -1;
}

}  // namespace

double pixel_loss(const Image& out, const Image& y) {
  require_same_shape(out, y, "pixel_loss");
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += channel_l2(out, y, c);
  return s / (3.0 * out.pixels());
}

double color_shift_loss(const Image& out, const Image& y) {
  require_same_shape(out, y, "color_shift_loss");
  const Image a = rgb_to_yuv(out);
  const Image b = rgb_to_yuv(y);
  return (channel_l2(a, b, 1) + channel_l2(a, b, 2)) / (2.0 * out.pixels());
}

double mse_loss(const Image& out, const Image& y) {
  require_same_shape(out, y, "mse_loss");
  double acc = 0.0;
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double d = out.data[i] - y.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(out.data.size());
}

DiffTensor record_attack_loss(Tape& tape, AttackLoss kind, const DiffTensor& out,
                              const Image& y) {
  DiffTensor yt = tape.leaf(out.dims, false);
  tape.set_value(yt, y);
  const long wh = static_cast<long>(y.pixels());
  DiffTensor d = tape.sub(out, yt);
  switch (kind) {
    case AttackLoss::kPixel:
      return tape.scale(tape.sum(tape.l2norm(d, Region::kPerChannel)),
                        1.0 / (3.0 * wh));
    case AttackLoss::kColorShift: {
      // Zero out the Y plane with a constant mask so only chroma contributes.
      DiffTensor dyuv = tape.sub(tape.color_transform(out), tape.color_transform(yt));
      std::vector<float> mask(static_cast<size_t>(3) * wh, 1.0f);
      std::fill(mask.begin(), mask.begin() + wh, 0.0f);
      DiffTensor mt = tape.leaf(out.dims, false);
      tape.set_value(mt, mask);
      DiffTensor chroma = tape.mul(dyuv, mt);
      return tape.scale(tape.sum(tape.l2norm(chroma, Region::kPerChannel)),
                        1.0 / (2.0 * wh));
    }
    case AttackLoss::kMse:
      return tape.mean(tape.mul(d, d));
  }
  throw ValidationError("record_attack_loss: unknown loss kind");
}

AttackResult pgd_attack(const Model& m, const Image& x, const Image& y,
                        const AttackConfig& cfg) {
  cfg.validate();
  require_same_shape(x, y, "pgd_attack");

  Model::Recorded rec = m.record(x.height, x.width, /*input_grad=*/true,
                                 /*param_grad=*/false);
  DiffTensor loss = record_attack_loss(rec.tape, cfg.loss, rec.out, y);

  const int mc = mask_channel(cfg.mask);
  const long n = x.pixels();
  Rng rng(cfg.seed);

  Image cur = x;
  if (cfg.init == InitMode::kUniform) {
    for (size_t i = 0; i < cur.data.size(); ++i) {
      const double noise = rng.uniform(-cfg.epsilon, cfg.epsilon);
      const int c = static_cast<int>(i / n);
      if (mc < 0 || c == mc) cur.data[i] += noise;
    }
    cur = clamp01(cur);
  }

  AttackResult res;
  res.seed = cfg.seed;
  res.loss_trace.reserve(cfg.iters + 1);

  for (int t = 0; t < cfg.iters; ++t) {
    rec.tape.set_value(rec.x, cur);
    rec.tape.forward();
    res.loss_trace.push_back(rec.tape.scalar(loss));
    rec.tape.backward(loss);
    const std::span<const double> g = rec.tape.grad(rec.x);
    for (const double v : g)
      if (!std::isfinite(v)) throw ValidationError("pgd_attack: non-finite gradient");

    for (size_t i = 0; i < cur.data.size(); ++i) {
      const int c = static_cast<int>(i / n);
      if (mc >= 0 && c != mc) continue;
      const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
      double step = cfg.alpha * s;
      if (cfg.projection == Projection::kStepClip)
        step = std::clamp(step, -cfg.epsilon, cfg.epsilon);
      double v = cur.data[i] + step;
      if (cfg.projection == Projection::kCumulative)
        v = std::clamp(v, x.data[i] - cfg.epsilon, x.data[i] + cfg.epsilon);
      cur.data[i] = std::clamp(v, 0.0, 1.0);
    }
  }

  rec.tape.set_value(rec.x, cur);
  rec.tape.forward();
  res.loss_trace.push_back(rec.tape.scalar(loss));

  res.x_adv = std::move(cur);
  res.linf = max_abs_diff(res.x_adv, x);
  return res;
}

Image random_noise(const Image& x, NoiseKind kind, double epsilon, uint64_t seed) {
  if (epsilon < 0.0) throw ValidationError("random_noise: epsilon must be >= 0");
  Image out = x;
  if (epsilon == 0.0) return out;
  Rng rng(seed);
  for (double& v : out.data)
    v += (kind == NoiseKind::kGaussian) ? rng.normal(epsilon)
                                        : rng.uniform(-epsilon, epsilon);
  return clamp01(out);
}

std::string to_string(AttackLoss v) {
  switch (v) {
    case AttackLoss::kPixel: return "pixel";
    case AttackLoss::kColorShift: return "color-shift";
    case AttackLoss::kMse: return "mse";
  }
  return "?";
}

std::string to_string(ChannelMask v) {
  switch (v) {
    case ChannelMask::kNone: return "none";
    case ChannelMask::kR: return "R";
    case ChannelMask::kG: return "G";
    case ChannelMask::kB: return "B";
  }
  return "?";
}

std::string to_string(Projection v) {
  return v == Projection::kCumulative ? "cumulative" : "step-clip";
}

std::string to_string(InitMode v) {
  return v == InitMode::kUniform ? "uniform" : "zero";
}

}  // namespace uwr
