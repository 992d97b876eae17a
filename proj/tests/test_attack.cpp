#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "uwr/attack.hpp"
#include "uwr/autodiff.hpp"
#include "uwr/error.hpp"
#include "uwr/image.hpp"
#include "uwr/model.hpp"
#include "uwr/rng.hpp"

using namespace uwr;
using testutil::pattern_image;

namespace {

Image single_pixel(double r, double g, double b) {
  Image img(1, 1);
  img.at(0, 0, 0) = r;
  img.at(1, 0, 0) = g;
  img.at(2, 0, 0) = b;
  return img;
}

}  // namespace

TEST_CASE("pixel_loss values") {
  const Image y = pattern_image(2, 2, testutil::pat_y);
  CHECK(pixel_loss(y, y) == 0.0);
  CHECK(pixel_loss(single_pixel(0.5, 0.5, 0.5), single_pixel(0, 0, 0)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  const Image o = pattern_image(2, 2, testutil::pat_x);
  CHECK(pixel_loss(o, y) == doctest::Approx(0.17002344941312017).epsilon(1e-12));
}

TEST_CASE("color_shift_loss ignores luma") {
  const Image y = pattern_image(2, 2, testutil::pat_y);
  CHECK(color_shift_loss(y, y) == 0.0);

  Image gray_a(2, 2), gray_b(2, 2);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        gray_a.at(c, i, j) = 0.2 + 0.1 * i;
        gray_b.at(c, i, j) = 0.7 - 0.2 * j;
      }
  CHECK(color_shift_loss(gray_a, gray_b) < 1e-12);  // different luma, zero chroma

  CHECK(color_shift_loss(single_pixel(1, 0, 0), single_pixel(0, 0, 1)) ==
        doctest::Approx(0.6488875).epsilon(1e-9));
  const Image o = pattern_image(2, 2, testutil::pat_x);
  CHECK(color_shift_loss(o, y) == doctest::Approx(0.11375201260086232).epsilon(1e-12));
}

TEST_CASE("mse_loss values") {
  const Image o = pattern_image(2, 2, testutil::pat_x);
  const Image y = pattern_image(2, 2, testutil::pat_y);
  CHECK(mse_loss(o, y) == doctest::Approx(0.12473838252314816).epsilon(1e-12));
  CHECK(mse_loss(Image(3, 3, 0.3), Image(3, 3, 0.4)) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("recorded losses agree with their plain forms") {
  const Image o = pattern_image(4, 4, testutil::pat_x);
  const Image y = pattern_image(4, 4, testutil::pat_y);
  const double plain[3] = {pixel_loss(o, y), color_shift_loss(o, y), mse_loss(o, y)};
  const AttackLoss kinds[3] = {AttackLoss::kPixel, AttackLoss::kColorShift,
                               AttackLoss::kMse};
  for (int k = 0; k < 3; ++k) {
    Tape t;
    const DiffTensor out = t.leaf(Dims::chw(3, 4, 4), true);
    t.set_value(out, o);
    const DiffTensor loss = record_attack_loss(t, kinds[k], out, y);
    t.forward();
    CHECK(t.scalar(loss) == doctest::Approx(plain[k]).epsilon(1e-6));
    CHECK(grad_check(t, loss, {out}, 1e-3) < 1e-3);
  }
}

// Frozen PGD fixture: affine model a=(1.2,0.8,1.0), b=(0.05,-0.02,0), pattern
// x/y, pixel loss, zero init, eps=4/255, alpha=2/255, T=6. Expected values
// were computed offline with an independent implementation.
namespace {

AttackConfig fixture_config(Projection proj) {
  AttackConfig cfg;
  cfg.epsilon = 4.0 / 255.0;
  cfg.alpha = 2.0 / 255.0;
  cfg.iters = 6;
  cfg.loss = AttackLoss::kPixel;
  cfg.projection = proj;
  cfg.init = InitMode::kZero;
  return cfg;
}

const Model& fixture_model() {
  static const Model m = build_affine({1.2, 0.8, 1.0}, {0.05, -0.02, 0.0});
  return m;
}

}  // namespace

TEST_CASE("pgd cumulative mode matches the frozen trajectory") {
  const Image x = pattern_image(2, 2, testutil::pat_x);
  const Image y = pattern_image(2, 2, testutil::pat_y);
  const AttackResult r = pgd_attack(fixture_model(), x, y, fixture_config(Projection::kCumulative));

  const double trace[7] = {0.18392345268544888, 0.1870654298855163,
                           0.19023572507129063, 0.1902357250712907,
                           0.1902357250712907,  0.1902357250712907,
                           0.1902357250712907};
  const double xadv[12] = {0.1256862745098039,  0.4956862745098039,
                           0.865686274509804,   0.19431372549019607,
                           0.5956862745098039,  0.9343137254901961,
                           0.2943137254901961,  0.6643137254901961,
                           0.02431372549019608, 0.39431372549019605,
                           0.7956862745098039,  0.15568627450980393};
  REQUIRE(r.loss_trace.size() == 7);
  for (int i = 0; i < 7; ++i)
    CHECK(r.loss_trace[i] == doctest::Approx(trace[i]).epsilon(1e-4));
  for (int i = 0; i < 12; ++i)
    CHECK(r.x_adv.data[i] == doctest::Approx(xadv[i]).epsilon(1e-9));
  CHECK(r.linf == doctest::Approx(4.0 / 255.0).epsilon(1e-12));
  // zero init: entry 0 is the loss of the unperturbed input
  CHECK(r.loss_trace[0] ==
        doctest::Approx(pixel_loss(fixture_model().forward(x), y)).epsilon(1e-6));
}

TEST_CASE("pgd step-clip mode can leave the epsilon ball") {
  const Image x = pattern_image(2, 2, testutil::pat_x);
  const Image y = pattern_image(2, 2, testutil::pat_y);
  const AttackResult r = pgd_attack(fixture_model(), x, y, fixture_config(Projection::kStepClip));

  const double trace[7] = {0.18392345268544888, 0.1870654298855163,
                           0.19023572507129063, 0.1934329323298615,
                           0.19665573100633074, 0.1999028798325615,
                           0.20285623248718};
  const double xadv[12] = {0.15705882352941175, 0.5270588235294116,
                           0.8970588235294116,  0.16294117647058823,
                           0.6270588235294116,  0.9029411764705884,
                           0.26294117647058834, 0.6329411764705885,
                           0.0,                 0.3629411764705883,
                           0.8270588235294116,  0.18705882352941178};
  REQUIRE(r.loss_trace.size() == 7);
  for (int i = 0; i < 7; ++i)
    CHECK(r.loss_trace[i] == doctest::Approx(trace[i]).epsilon(1e-4));
  for (int i = 0; i < 12; ++i)
    CHECK(r.x_adv.data[i] == doctest::Approx(xadv[i]).epsilon(1e-9));
  CHECK(r.linf == doctest::Approx(12.0 / 255.0).epsilon(1e-12));  // 6 steps of alpha
}

TEST_CASE("pgd with zero epsilon is the identity") {
  const Image x = pattern_image(3, 3, testutil::pat_x);
  const Image y = pattern_image(3, 3, testutil::pat_y);
  AttackConfig cfg;
  cfg.epsilon = 0.0;
  cfg.iters = 3;
  cfg.seed = 9;
  const AttackResult r = pgd_attack(fixture_model(), x, y, cfg);
  CHECK(r.x_adv.data == x.data);
  CHECK(r.linf == 0.0);
}

TEST_CASE("pgd is deterministic per seed and varies across seeds") {
  const Model m = build_tiny_enhancer(2);
  const Image x = pattern_image(8, 8, testutil::pat_x);
  const Image y = pattern_image(8, 8, testutil::pat_y);
  AttackConfig cfg;
  cfg.iters = 2;
  cfg.seed = 5;
  const AttackResult a = pgd_attack(m, x, y, cfg);
  const AttackResult b = pgd_attack(m, x, y, cfg);
  CHECK(a.x_adv.data == b.x_adv.data);
  CHECK(a.loss_trace == b.loss_trace);

  cfg.seed = 6;
  const AttackResult c = pgd_attack(m, x, y, cfg);
  CHECK(a.x_adv.data != c.x_adv.data);  // uniform init depends on the seed
}

TEST_CASE("cumulative projection keeps iterates inside ball and unit range") {
  const Model m = build_tiny_enhancer(4);
  Rng rng(31);
  for (int run = 0; run < 10; ++run) {
    Image x(12, 12);
    for (double& v : x.data) v = rng.uniform();
    const Image y = clamp01(m.forward(x));
    AttackConfig cfg;
    cfg.epsilon = rng.uniform(0.0, 16.0 / 255.0);
    cfg.alpha = rng.uniform(0.0, 4.0 / 255.0);
    cfg.iters = 1 + static_cast<int>(rng.uniform_index(5));
    cfg.seed = rng.next_u64();
    const AttackResult r = pgd_attack(m, x, y, cfg);
    CHECK(max_abs_diff(r.x_adv, x) <= cfg.epsilon + 1e-12);
    CHECK(in_unit_range(r.x_adv));
    CHECK(r.linf <= cfg.epsilon + 1e-12);
    CHECK(r.loss_trace.size() == static_cast<size_t>(cfg.iters) + 1);
  }
}

TEST_CASE("channel masks pin the other channels bitwise") {
  const Model m = build_tiny_enhancer(6);
  const Image x = pattern_image(8, 8, testutil::pat_x);
  const Image y = pattern_image(8, 8, testutil::pat_y);
  const ChannelMask masks[3] = {ChannelMask::kR, ChannelMask::kG, ChannelMask::kB};
  for (int mc = 0; mc < 3; ++mc) {
    AttackConfig cfg;
    cfg.mask = masks[mc];
    cfg.iters = 3;
    cfg.seed = 17;
    const AttackResult r = pgd_attack(m, x, y, cfg);
    const std::size_t plane = x.pixels();
    bool masked_changed = false;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < plane; ++i) {
        const double xv = x.data[c * plane + i];
        const double av = r.x_adv.data[c * plane + i];
        if (c == mc) {
          if (av != xv) masked_changed = true;
        } else {
          CHECK(av == xv);
        }
      }
    CHECK(masked_changed);
  }
}

TEST_CASE("attack config validation") {
  AttackConfig cfg;
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.epsilon = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.alpha = -1e-9;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("random_noise bounds, determinism and zero-epsilon identity") {
  const Image x = pattern_image(16, 16, testutil::pat_x);
  CHECK(random_noise(x, NoiseKind::kGaussian, 0.0, 1).data == x.data);
  CHECK(random_noise(x, NoiseKind::kUniform, 0.0, 1).data == x.data);

  const double eps = 8.0 / 255.0;
  const Image u = random_noise(x, NoiseKind::kUniform, eps, 11);
  CHECK(u.data == random_noise(x, NoiseKind::kUniform, eps, 11).data);
  CHECK(u.data != random_noise(x, NoiseKind::kUniform, eps, 12).data);
  CHECK(in_unit_range(u));
  CHECK(max_abs_diff(u, x) <= eps + 1e-12);

  const Image g = random_noise(x, NoiseKind::kGaussian, eps, 11);
  CHECK(in_unit_range(g));
  CHECK(g.data != x.data);
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum_abs += std::abs(g.data[i] - x.data[i]);
  // E|N(0, sigma)| = sigma*sqrt(2/pi) ~ 0.8 sigma; clamping only shrinks it
  const double mean_abs = sum_abs / static_cast<double>(x.size());
  CHECK(mean_abs > 0.3 * eps);
  CHECK(mean_abs < 1.2 * eps);
}

TEST_CASE("enum names used in CSV and CLI output") {
  CHECK(to_string(AttackLoss::kPixel) == "pixel");
  CHECK(to_string(AttackLoss::kColorShift) == "color-shift");
  CHECK(to_string(AttackLoss::kMse) == "mse");
  CHECK(to_string(ChannelMask::kNone) == "none");
  CHECK(to_string(ChannelMask::kR) == "R");
  CHECK(to_string(ChannelMask::kG) == "G");
  CHECK(to_string(ChannelMask::kB) == "B");
  CHECK(to_string(Projection::kCumulative) == "cumulative");
  CHECK(to_string(Projection::kStepClip) == "step-clip");
  CHECK(to_string(InitMode::kUniform) == "uniform");
  CHECK(to_string(InitMode::kZero) == "zero");
}
