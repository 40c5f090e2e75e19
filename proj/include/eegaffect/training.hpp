#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eegaffect/autodiff.hpp"
#include "eegaffect/evaluation.hpp"
#include "eegaffect/models.hpp"

namespace eegaffect {

enum class Task { kBinary, kCategorical, kMultilabel };

const char* to_string(Task task);
Task task_from_string(const std::string& s);

// Output width the head needs: 1 (binary logit), 4 (categorical), 4 * n_bins
// (multilabel).
int head_dim_for(Task task, int n_bins);

struct TrainConfig {
  double lr = 0.005;
  int epochs = 100;
  int batch_size = 32;
  double weight_decay = 1e-4;
  double clip_norm = 1.0;
  double dropout_p = 0.3;
  int warmup_epochs = 5;
  double eta_min = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;

  void validate() const;  // throws Error("bad_train_config")
};

// Linear ramp 0 -> lr across warmup_epochs, then cosine decay
// eta_min + (lr - eta_min) * (1 + cos(pi * (e - W) / (E - W))) / 2.
double cosine_warmup_lr(int epoch, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// losses (fused tape ops with hand-derived gradients, stable formulations)

// Mean over the batch of -log softmax(logits)[target].
template <typename T>
ad::Var loss_ce(ad::Tape<T>& tape, ad::Var logits, const std::vector<int>& targets) {
  const auto& lv = tape.value(logits);
  if (lv.shape.size() != 2 || lv.shape[0] != static_cast<int>(targets.size())) {
    fail("shape_mismatch", "loss_ce needs [batch, k] logits matching " +
                               std::to_string(targets.size()) + " targets, got " +
                               ad::shape_str(lv.shape));
  }
  const int batch = lv.shape[0];
  const int k = lv.shape[1];
  for (int t : targets) {
    if (t < 0 || t >= k) fail("label_out_of_range", "target class " + std::to_string(t));
  }

  auto run = [logits, targets, batch, k](ad::Tape<T>& t, ad::Tensor<T>& out) {
    const auto& z = t.value(logits);
    double acc = 0.0;
    for (int b = 0; b < batch; ++b) {
      const T* row = z.data.data() + static_cast<int64_t>(b) * k;
      T hi = row[0];
      for (int j = 1; j < k; ++j) hi = std::max(hi, row[j]);
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - hi));
      acc += std::log(sum) + static_cast<double>(hi) -
             static_cast<double>(row[targets[static_cast<size_t>(b)]]);
    }
    out.data[0] = static_cast<T>(acc / batch);
  };
  ad::Tensor<T> out(ad::Shape{1});
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](ad::Tape<T>& t) { run(t, t.node(id).value); },
      [id, logits, targets, batch, k](ad::Tape<T>& t) {
        const T g = t.node(id).grad.data[0] / static_cast<T>(batch);
        const auto& z = t.node(logits.id).value;
        auto& gz = t.node(logits.id).grad;
        for (int b = 0; b < batch; ++b) {
          const T* row = z.data.data() + static_cast<int64_t>(b) * k;
          T* grow = gz.data.data() + static_cast<int64_t>(b) * k;
          T hi = row[0];
          for (int j = 1; j < k; ++j) hi = std::max(hi, row[j]);
          double sum = 0.0;
          for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - hi));
          for (int j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(row[j] - hi)) / sum;
            const double delta = p - (j == targets[static_cast<size_t>(b)] ? 1.0 : 0.0);
            grow[j] += g * static_cast<T>(delta);
          }
        }
      });
}

// Mean over all elements of -[y log sig(z) + (1 - y) log(1 - sig(z))] in the
// stable form max(z, 0) - z*y + log1p(exp(-|z|)).
template <typename T>
ad::Var loss_bce(ad::Tape<T>& tape, ad::Var logits, const std::vector<T>& targets01) {
  const auto& lv = tape.value(logits);
  if (lv.numel() != static_cast<int64_t>(targets01.size())) {
    fail("shape_mismatch", "loss_bce needs targets for every logit, got " +
                               std::to_string(targets01.size()) + " for " +
                               ad::shape_str(lv.shape));
  }
  const int64_t n = lv.numel();

  auto run = [logits, targets01, n](ad::Tape<T>& t, ad::Tensor<T>& out) {
    const auto& z = t.value(logits);
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double zi = static_cast<double>(z.data[static_cast<size_t>(i)]);
      const double yi = static_cast<double>(targets01[static_cast<size_t>(i)]);
      acc += std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::abs(zi)));
    }
    out.data[0] = static_cast<T>(acc / static_cast<double>(n));
  };
  ad::Tensor<T> out(ad::Shape{1});
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](ad::Tape<T>& t) { run(t, t.node(id).value); },
      [id, logits, targets01, n](ad::Tape<T>& t) {
        const T g = t.node(id).grad.data[0] / static_cast<T>(n);
        const auto& z = t.node(logits.id).value;
        auto& gz = t.node(logits.id).grad;
        for (int64_t i = 0; i < n; ++i) {
          const double zi = static_cast<double>(z.data[static_cast<size_t>(i)]);
          const double s = zi >= 0.0 ? 1.0 / (1.0 + std::exp(-zi))
                                     : std::exp(zi) / (1.0 + std::exp(zi));
          gz.data[static_cast<size_t>(i)] +=
              g * static_cast<T>(s - static_cast<double>(targets01[static_cast<size_t>(i)]));
        }
      });
}

// ---------------------------------------------------------------------------
// optimizer

template <typename T>
struct OptimizerState {
  std::vector<ad::Tensor<T>> m;  // first moments, aligned with the param list
  std::vector<ad::Tensor<T>> v;  // second moments
  int64_t step = 0;

  explicit OptimizerState(const std::vector<ad::Parameter<T>*>& params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto* p : params) {
      m.emplace_back(p->value.shape);
      v.emplace_back(p->value.shape);
    }
  }
};

// Global L2 norm across every gradient; scales all gradients down to
// max_norm when exceeded. Returns the pre-clip norm.
template <typename T>
double clip_gradients(const std::vector<ad::Parameter<T>*>& params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (T g : p->grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto* p : params) {
      for (auto& g : p->grad.data) g *= scale;
    }
  }
  return norm;
}

// Decoupled weight decay: theta <- theta - lr_t * m_hat / (sqrt(v_hat) + eps)
//                                 - lr_t * lambda * theta
// with bias-corrected moments; decay skips parameters flagged decay=false.
template <typename T>
void adamw_step(const std::vector<ad::Parameter<T>*>& params, OptimizerState<T>& state,
                double lr_t, const TrainConfig& cfg) {
  if (params.size() != state.m.size()) {
    fail("shape_mismatch", "optimizer state does not match parameter list");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = *params[pi];
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    const double decay = p.decay ? cfg.weight_decay : 0.0;
    for (size_t i = 0; i < p.value.data.size(); ++i) {
      const double g = static_cast<double>(p.grad.data[i]);
      const double mi = cfg.beta1 * static_cast<double>(m.data[i]) + (1.0 - cfg.beta1) * g;
      const double vi = cfg.beta2 * static_cast<double>(v.data[i]) + (1.0 - cfg.beta2) * g * g;
      m.data[i] = static_cast<T>(mi);
      v.data[i] = static_cast<T>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      const double theta = static_cast<double>(p.value.data[i]);
      p.value.data[i] =
          static_cast<T>(theta - lr_t * m_hat / (std::sqrt(v_hat) + cfg.eps) - lr_t * decay * theta);
    }
  }
}

// ---------------------------------------------------------------------------
// epoch loop

struct SequenceEval {
  MetricReport report;
  ConfusionMatrix confusion;  // multilabel: elementwise sum of the group matrices
  std::array<ConfusionMatrix, 4> group_cms;  // multilabel only
  double loss = 0.0;
};

namespace detail {

template <typename T>
ad::Tensor<T> sequence_batch_tensor(const SequenceDataset& data, const std::vector<int>& idx,
                                    size_t start, size_t stop) {
  const int batch = static_cast<int>(stop - start);
  const int seq_len = static_cast<int>(data[static_cast<size_t>(idx[start])].steps.size());
  ad::Tensor<T> out(ad::Shape{batch, seq_len, kFeatureDim});
  T* dst = out.data.data();
  for (size_t b = start; b < stop; ++b) {
    const auto& steps = data[static_cast<size_t>(idx[b])].steps;
    for (const auto& step : steps) {
      for (double v : step) *dst++ = static_cast<T>(v);
    }
  }
  return out;
}

template <typename T>
ad::Var task_loss(ad::Tape<T>& tape, ad::Var logits, const SequenceDataset& data,
                  const std::vector<int>& idx, size_t start, size_t stop, Task task, int n_bins) {
  if (task == Task::kCategorical) {
    std::vector<int> targets;
    targets.reserve(stop - start);
    for (size_t b = start; b < stop; ++b) {
      targets.push_back(static_cast<int>(data[static_cast<size_t>(idx[b])].labels.categorical));
    }
    return loss_ce(tape, logits, targets);
  }
  std::vector<T> targets;
  if (task == Task::kBinary) {
    targets.reserve(stop - start);
    for (size_t b = start; b < stop; ++b) {
      targets.push_back(static_cast<T>(data[static_cast<size_t>(idx[b])].labels.binary_valence));
    }
  } else {
    targets.reserve((stop - start) * static_cast<size_t>(4 * n_bins));
    for (size_t b = start; b < stop; ++b) {
      const auto hot =
          to_multihot(data[static_cast<size_t>(idx[b])].labels.ordinal_bins, n_bins);
      for (int v : hot) targets.push_back(static_cast<T>(v));
    }
  }
  return loss_bce(tape, logits, targets);
}

}  // namespace detail

// Forward the whole dataset in eval mode (no dropout) and score it.
template <typename T>
SequenceEval evaluate_sequence_model(SequenceModel<T>& model, const SequenceDataset& data,
                                     const TrainConfig& cfg, Task task, int n_bins) {
  if (data.empty()) fail("empty_dataset", "cannot evaluate on an empty dataset");
  std::vector<int> idx(data.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  std::mt19937_64 rng(0);  // unused: dropout is inactive in eval mode
  std::vector<int> true_single, pred_single;
  std::vector<std::array<int, 4>> true_bins, pred_bins;
  double loss_acc = 0.0;

  for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(cfg.batch_size)) {
    const size_t stop = std::min(idx.size(), start + static_cast<size_t>(cfg.batch_size));
    ad::Tape<T> tape;
    const auto feats = detail::sequence_batch_tensor<T>(data, idx, start, stop);
    ad::Var logits = model.forward(tape, feats, /*train_mode=*/false, rng);
    ad::Var loss = detail::task_loss(tape, logits, data, idx, start, stop, task, n_bins);
    loss_acc += static_cast<double>(tape.value(loss).data[0]) * static_cast<double>(stop - start);

    const auto& z = tape.value(logits);
    const int width = z.shape[1];
    for (size_t b = start; b < stop; ++b) {
      const T* row = z.data.data() + static_cast<int64_t>(b - start) * width;
      const auto& labels = data[static_cast<size_t>(idx[b])].labels;
      if (task == Task::kBinary) {
        true_single.push_back(labels.binary_valence);
        pred_single.push_back(row[0] > T(0) ? 1 : 0);
      } else if (task == Task::kCategorical) {
        int best = 0;
        for (int j = 1; j < width; ++j) {
          if (row[j] > row[best]) best = j;
        }
        true_single.push_back(static_cast<int>(labels.categorical));
        pred_single.push_back(best);
      } else {
        std::array<int, 4> bins{};
        for (int g = 0; g < 4; ++g) {
          const T* group = row + g * n_bins;
          int best = 0;
          for (int j = 1; j < n_bins; ++j) {
            if (group[j] > group[best]) best = j;
          }
          bins[static_cast<size_t>(g)] = best;
        }
        true_bins.push_back(labels.ordinal_bins);
        pred_bins.push_back(bins);
      }
    }
  }

  SequenceEval out;
  out.loss = loss_acc / static_cast<double>(data.size());
  if (task == Task::kMultilabel) {
    MultilabelReport ml = multilabel_metrics(true_bins, pred_bins, n_bins);
    out.report = ml.combined;
    out.group_cms = ml.group_cms;
    out.confusion = ml.group_cms[0];
    for (int g = 1; g < 4; ++g) out.confusion += ml.group_cms[static_cast<size_t>(g)];
  } else {
    const int k = task == Task::kBinary ? 2 : 4;
    out.confusion = confusion(true_single, pred_single, k);
    out.report = metrics(out.confusion);
  }
  out.report.task = to_string(task);
  return out;
}

// Alg.-style epoch loop: shuffle, batch, forward, loss, backward, clip,
// AdamW, cosine schedule; validation metrics and a confusion snapshot per
// epoch. Deterministic given cfg.seed. Throws Error("diverged_loss") with
// the epoch index when a batch loss goes non-finite.
template <typename T>
std::vector<EpochLog> fit(SequenceModel<T>& model, const SequenceDataset& train,
                          const SequenceDataset& val, const TrainConfig& cfg, Task task,
                          int n_bins) {
  cfg.validate();
  if (train.empty()) fail("empty_dataset", "fit needs a non-empty training set");
  const int expected_head = head_dim_for(task, n_bins);
  if (model.config().head_dim != expected_head) {
    fail("head_mismatch", "model head_dim " + std::to_string(model.config().head_dim) +
                              " does not fit task " + to_string(task) + " (needs " +
                              std::to_string(expected_head) + ")");
  }

  auto params = model.parameters();
  OptimizerState<T> state(params);
  std::mt19937_64 rng(cfg.seed);

  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  std::vector<EpochLog> logs;
  logs.reserve(static_cast<size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr_t = cosine_warmup_lr(epoch, cfg);
    std::shuffle(order.begin(), order.end(), rng);

    double train_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      ad::Tape<T> tape;
      const auto feats = detail::sequence_batch_tensor<T>(train, order, start, stop);
      ad::Var logits = model.forward(tape, feats, /*train_mode=*/true, rng);
      ad::Var loss = detail::task_loss(tape, logits, train, order, start, stop, task, n_bins);

      const double loss_value = static_cast<double>(tape.value(loss).data[0]);
      if (!std::isfinite(loss_value)) {
        fail("diverged_loss", "loss diverged at epoch " + std::to_string(epoch));
      }
      train_loss += loss_value * static_cast<double>(stop - start);

      for (auto* p : params) p->zero_grad();
      tape.backward(loss);
      clip_gradients(params, cfg.clip_norm);
      adamw_step(params, state, lr_t, cfg);
    }
    train_loss /= static_cast<double>(train.size());

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr_t;
    log.train_loss = train_loss;
    if (!val.empty()) {
      SequenceEval ev = evaluate_sequence_model(model, val, cfg, task, n_bins);
      log.val_loss = ev.loss;
      log.accuracy = ev.report.accuracy;
      log.precision = ev.report.macro_precision;
      log.recall = ev.report.macro_recall;
      log.f1 = ev.report.macro_f1;
      log.confusion = ev.confusion;
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

}  // namespace eegaffect
