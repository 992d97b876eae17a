#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwr/attack.hpp"
#include "uwr/dataset.hpp"
#include "uwr/image.hpp"
#include "uwr/model.hpp"

namespace uwr {

enum class TrainMode { kStandard, kAdversarial };

struct TrainConfig {
  TrainMode mode = TrainMode::kStandard;
  int epochs = 50;
  int batch_size = 6;
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double lambda = 1.0;  // adversarial regularization coefficient
  AttackConfig inner;   // inner attack for adversarial mode (default mse loss)
  uint64_t seed = 42;
  unsigned jobs = 1;
  std::string checkpoint_out;  // written at end of train() when non-empty

  TrainConfig() { inner.loss = AttackLoss::kMse; }
  void validate() const;
};

struct TrainEpoch {
  int epoch = 0;       // 1-based
  double l_model = 0;  // mean over optimizer steps of the batch model loss
  double l_adv = 0;    // mean over optimizer steps of the batch regularizer
  double seconds = 0;
  std::string rng_digest;  // digest of the epoch's shuffle order
};

struct TrainLog {
  std::vector<TrainEpoch> epochs;
};

/// Mean squared error over all elements.
double model_loss(const Image& out, const Image& y);

/// Euclidean norm over all 3*H*W elements of f_x - f_xadv (one batch item).
double adv_regularizer(const Image& f_x, const Image& f_xadv);
/// Batch form: sum of the per-item norms.
double adv_regularizer(const std::vector<Image>& f_x,
                       const std::vector<Image>& f_xadv);

struct AdamState {
  std::vector<std::vector<double>> m, v;  // aligned with Model::params
  long t = 0;
  void init(const Model& model);
};

struct StepLosses {
  double l_model = 0;
  double l_adv = 0;
};

/// One optimizer update on a batch of pair indices. In adversarial mode each
/// item gets x^adv = pgd(x) with a seed derived from step_seed; gradients do
/// not flow through the inner attack (x^adv is data). The combined loss is
///   L = mean_i mse(f(x_i), y_i) + lambda * sum_i ||f(x_i) - f(x_i^adv)||_2.
/// Standard mode drops the second term and skips attack generation.
StepLosses train_step(Model& m, const std::vector<LoadedPair>& pairs,
                      const std::vector<int>& batch, const TrainConfig& cfg,
                      AdamState& opt, uint64_t step_seed);

/// Seeded-shuffle epoch loop over preloaded pairs; writes the checkpoint to
/// cfg.checkpoint_out when set. Aborts with diagnostics on non-finite loss.
TrainLog train(Model& m, const std::vector<LoadedPair>& train_pairs,
               const TrainConfig& cfg);

/// CSV with columns: epoch,l_model,l_adv,seconds.
void write_train_log(const TrainLog& log, const std::string& path);

}  // namespace uwr
