#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwr/autodiff.hpp"
#include "uwr/image.hpp"
#include "uwr/model.hpp"

namespace uwr {

enum class AttackLoss { kPixel, kColorShift, kMse };
enum class ChannelMask { kNone, kR, kG, kB };
enum class Projection { kCumulative, kStepClip };
enum class InitMode { kUniform, kZero };

struct AttackConfig {
  double epsilon = 8.0 / 255.0;  // l-inf budget in [0,1]
  double alpha = 2.0 / 255.0;    // step size
  int iters = 20;
  AttackLoss loss = AttackLoss::kPixel;
  ChannelMask mask = ChannelMask::kNone;
  Projection projection = Projection::kCumulative;
  InitMode init = InitMode::kUniform;
  uint64_t seed = 0;

  void validate() const;  // 0 <= alpha, 0 <= epsilon <= 1, iters >= 1
};

struct AttackResult {
  Image x_adv;
  /// loss_trace[t] = L(f(x^t), y); entry 0 is the post-init iterate, the last
  /// entry is the final one (iters + 1 entries).
  std::vector<double> loss_trace;
  double linf = 0.0;  // achieved max |x_adv - x|
  uint64_t seed = 0;
  AttackResult() : x_adv(1, 1) {}
};

/// (1/(3WH)) * sum_c ||out_c - y_c||_2.
double pixel_loss(const Image& out, const Image& y);
/// (1/(2WH)) * sum_{U,V} ||yuv(out)_u - yuv(y)_u||_2; blind to luma.
double color_shift_loss(const Image& out, const Image& y);
/// Mean squared error over all elements.
double mse_loss(const Image& out, const Image& y);

/// Appends the chosen loss subgraph to the tape, comparing `out` against a
/// fresh constant leaf holding y. Returns the scalar loss node.
DiffTensor record_attack_loss(Tape& tape, AttackLoss kind, const DiffTensor& out,
                              const Image& y);

/// Iterative sign-gradient attack. Init: x0 = clamp01(x + U(-eps,eps))
/// (uniform) or x0 = x (zero). Each step adds alpha*sgn(g) with sgn(0)=0;
/// cumulative projection keeps x^t within [x-eps, x+eps] before clamping to
/// [0,1], step-clip only clips each increment to [-eps, eps]. A channel mask
/// multiplies both the init noise and every step.
AttackResult pgd_attack(const Model& m, const Image& x, const Image& y,
                        const AttackConfig& cfg);

enum class NoiseKind { kGaussian, kUniform };

/// Adds seeded random noise (gaussian: N(0, sigma=epsilon); uniform:
/// U(-epsilon, epsilon)) and clamps to [0,1].
Image random_noise(const Image& x, NoiseKind kind, double epsilon, uint64_t seed);

std::string to_string(AttackLoss v);
std::string to_string(ChannelMask v);
std::string to_string(Projection v);
std::string to_string(InitMode v);

}  // namespace uwr
