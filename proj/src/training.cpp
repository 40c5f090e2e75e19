#include "eegaffect/training.hpp"

#include <numbers>

namespace eegaffect {

const char* to_string(Task task) {
  switch (task) {
    case Task::kBinary: return "binary";
    case Task::kCategorical: return "categorical";
    case Task::kMultilabel: return "multilabel";
  }
  fail("bad_task", "invalid task value");
}

Task task_from_string(const std::string& s) {
  if (s == "binary") return Task::kBinary;
  if (s == "categorical") return Task::kCategorical;
  if (s == "multilabel") return Task::kMultilabel;
  fail("bad_task", "unknown task: " + s);
}

int head_dim_for(Task task, int n_bins) {
  switch (task) {
    case Task::kBinary: return 1;
    case Task::kCategorical: return 4;
    case Task::kMultilabel: return 4 * n_bins;
  }
  fail("bad_task", "invalid task value");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) fail("bad_train_config", "lr must be >= 0");
  if (epochs < 1) fail("bad_train_config", "epochs must be >= 1");
  if (batch_size < 1) fail("bad_train_config", "batch_size must be >= 1");
  if (weight_decay < 0.0) fail("bad_train_config", "weight_decay must be >= 0");
  if (!(clip_norm > 0.0)) fail("bad_train_config", "clip_norm must be positive");
  if (dropout_p < 0.0 || dropout_p >= 1.0) fail("bad_train_config", "dropout_p must be in [0, 1)");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) {
    fail("bad_train_config", "warmup_epochs must be in [0, epochs)");
  }
  if (eta_min < 0.0) fail("bad_train_config", "eta_min must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail("bad_train_config", "betas must be in [0, 1)");
  }
  if (!(eps > 0.0)) fail("bad_train_config", "eps must be positive");
}

double cosine_warmup_lr(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    fail("bad_train_config", "epoch " + std::to_string(epoch) + " outside [0, E)");
  }
  const int warm = cfg.warmup_epochs;
  if (epoch < warm) {
    return cfg.lr * static_cast<double>(epoch) / static_cast<double>(warm);
  }
  if (cfg.epochs - warm <= 1) return cfg.lr;
  const double progress =
      static_cast<double>(epoch - warm) / static_cast<double>(cfg.epochs - warm);
  return cfg.eta_min + 0.5 * (cfg.lr - cfg.eta_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace eegaffect
