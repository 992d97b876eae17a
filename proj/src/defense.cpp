#include "uwr/defense.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "uwr/error.hpp"
#include "uwr/parallel.hpp"
#include "uwr/rng.hpp"

namespace uwr {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch size must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("train: learning rate must be > 0");
  if (!(lambda >= 0.0)) throw ValidationError("train: lambda must be >= 0");
  if (mode == TrainMode::kAdversarial) inner.validate();
}

double model_loss(const Image& out, const Image& y) {
  if (!out.same_shape(y)) throw ValidationError("model_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double d = out.data[i] - y.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(out.data.size());
}

double adv_regularizer(const Image& f_x, const Image& f_xadv) {
  if (!f_x.same_shape(f_xadv))
    throw ValidationError("adv_regularizer: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < f_x.data.size(); ++i) {
    const double d = f_x.data[i] - f_xadv.data[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double adv_regularizer(const std::vector<Image>& f_x,
                       const std::vector<Image>& f_xadv) {
  if (f_x.size() != f_xadv.size())
    throw ValidationError("adv_regularizer: batch size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < f_x.size(); ++i) acc += adv_regularizer(f_x[i], f_xadv[i]);
  return acc;
}

void AdamState::init(const Model& model) {
  m.clear();
  v.clear();
  for (const Param& p : model.params) {
    m.emplace_back(p.value.size(), 0.0);
    v.emplace_back(p.value.size(), 0.0);
  }
  t = 0;
}

namespace {

struct ItemResult {
  std::vector<std::vector<double>> grads;  // per param
  double mse = 0.0;
  double ladv = 0.0;
};

ItemResult item_grads(const Model& m, const Image& x, const Image& y,
                      const Image* x_adv, double lambda, int batch_size) {
  Tape tape;
  DiffTensor xt = tape.leaf(Dims::chw(3, x.height, x.width), false);
  tape.set_value(xt, x);
  std::vector<DiffTensor> pl;
  pl.reserve(m.params.size());
  for (const Param& p : m.params) {
    DiffTensor t = tape.leaf(p.dims, true);
    tape.set_value(t, p.value);
    pl.push_back(t);
  }
  DiffTensor out = m.wire(tape, xt, pl);
  DiffTensor yt = tape.leaf(out.dims, false);
  tape.set_value(yt, y);
  DiffTensor d = tape.sub(out, yt);
  DiffTensor mse = tape.mean(tape.mul(d, d));
  DiffTensor loss = tape.scale(mse, 1.0 / batch_size);
  DiffTensor ladv;
  if (x_adv) {
    DiffTensor xat = tape.leaf(xt.dims, false);
    tape.set_value(xat, *x_adv);
    DiffTensor out_adv = m.wire(tape, xat, pl);
    ladv = tape.l2norm(tape.sub(out, out_adv));
    loss = tape.add(loss, tape.scale(ladv, lambda));
  }
  tape.forward();
  tape.backward(loss);

  ItemResult r;
  r.mse = tape.scalar(mse);
  if (x_adv) r.ladv = tape.scalar(ladv);
  r.grads.reserve(pl.size());
  for (const DiffTensor& t : pl) {
    const auto g = tape.grad(t);
    r.grads.emplace_back(g.begin(), g.end());
  }
  return r;
}

}  // namespace

StepLosses train_step(Model& m, const std::vector<LoadedPair>& pairs,
                      const std::vector<int>& batch, const TrainConfig& cfg,
                      AdamState& opt, uint64_t step_seed) {
  const int bsize = static_cast<int>(batch.size());
  std::vector<ItemResult> items(bsize);
  parallel_for(batch.size(), cfg.jobs, [&](size_t k) {
    const LoadedPair& p = pairs.at(batch[k]);
    if (cfg.mode == TrainMode::kAdversarial) {
      AttackConfig inner = cfg.inner;
      inner.seed = derive_seed(step_seed, k, 5);
      const Image x_adv = pgd_attack(m, p.x, p.y, inner).x_adv;
      items[k] = item_grads(m, p.x, p.y, &x_adv, cfg.lambda, bsize);
    } else {
      items[k] = item_grads(m, p.x, p.y, nullptr, 0.0, bsize);
    }
  });

  // Fixed-order accumulation keeps updates deterministic for any job count.
  std::vector<std::vector<double>> grads;
  grads.reserve(m.params.size());
  for (const Param& p : m.params) grads.emplace_back(p.value.size(), 0.0);
  StepLosses losses;
  for (int k = 0; k < bsize; ++k) {
    losses.l_model += items[k].mse / bsize;
    losses.l_adv += items[k].ladv;
    for (size_t pi = 0; pi < grads.size(); ++pi)
      for (size_t j = 0; j < grads[pi].size(); ++j)
        grads[pi][j] += items[k].grads[pi][j];
  }

  opt.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t));
  for (size_t pi = 0; pi < m.params.size(); ++pi) {
    std::vector<float>& pv = m.params[pi].value;
    for (size_t j = 0; j < pv.size(); ++j) {
      const double g = grads[pi][j];
      opt.m[pi][j] = cfg.beta1 * opt.m[pi][j] + (1.0 - cfg.beta1) * g;
      opt.v[pi][j] = cfg.beta2 * opt.v[pi][j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = opt.m[pi][j] / bc1;
      const double vhat = opt.v[pi][j] / bc2;
      pv[j] = static_cast<float>(pv[j] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
  return losses;
}

TrainLog train(Model& m, const std::vector<LoadedPair>& train_pairs,
               const TrainConfig& cfg) {
  cfg.validate();
  if (train_pairs.empty()) throw ValidationError("train: empty dataset");

  AdamState opt;
  opt.init(m);
  TrainLog log;
  const int n = static_cast<int>(train_pairs.size());

  for (int e = 0; e < cfg.epochs; ++e) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = batch_iter(n, cfg.batch_size, cfg.seed, e);

    std::vector<int> order;
    for (const auto& b : batches) order.insert(order.end(), b.begin(), b.end());
    TrainEpoch ep;
    ep.epoch = e + 1;
    ep.rng_digest =
        to_hex(fnv1a64(order.data(), order.size() * sizeof(int)));

    for (size_t s = 0; s < batches.size(); ++s) {
      const uint64_t step_seed = derive_seed(derive_seed(cfg.seed, e, 2), s, 3);
      const StepLosses l = train_step(m, train_pairs, batches[s], cfg, opt, step_seed);
      if (!std::isfinite(l.l_model) || !std::isfinite(l.l_adv)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "train: non-finite loss at epoch %d step %zu "
                      "(l_model=%g, l_adv=%g)",
                      e + 1, s, l.l_model, l.l_adv);
        throw std::runtime_error(buf);
      }
      ep.l_model += l.l_model;
      ep.l_adv += l.l_adv;
    }
    ep.l_model /= static_cast<double>(batches.size());
    ep.l_adv /= static_cast<double>(batches.size());
    ep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.epochs.push_back(std::move(ep));
  }

  if (!cfg.checkpoint_out.empty()) {
    m.metadata["training"] = {
        {"mode", cfg.mode == TrainMode::kAdversarial ? "adversarial" : "standard"},
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"lr", cfg.lr},
        {"seed", cfg.seed},
    };
    if (cfg.mode == TrainMode::kAdversarial) {
      m.metadata["training"]["lambda"] = cfg.lambda;
      m.metadata["training"]["inner_attack"] = {
          {"epsilon", cfg.inner.epsilon},
          {"alpha", cfg.inner.alpha},
          {"iters", cfg.inner.iters},
          {"loss", to_string(cfg.inner.loss)},
          {"projection", to_string(cfg.inner.projection)},
          {"init", to_string(cfg.inner.init)},
      };
    }
    save_checkpoint(m, cfg.checkpoint_out);
  }
  return log;
}

void write_train_log(const TrainLog& log, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_train_log: cannot write " + path);
  f << "epoch,l_model,l_adv,seconds\n";
  char buf[128];
  for (const TrainEpoch& e : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.3f\n", e.epoch, e.l_model,
                  e.l_adv, e.seconds);
    f << buf;
  }
}

}  // namespace uwr
