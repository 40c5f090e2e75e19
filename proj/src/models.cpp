#include "eegaffect/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegaffect/error.hpp"
#include "eegaffect/parallel.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

const char* to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kLstm: return "lstm";
    case Architecture::kGru: return "gru";
    case Architecture::kLstmGru: return "lstm_gru";
    case Architecture::kCnnLstm: return "cnn_lstm";
  }
  fail("bad_model_config", "invalid architecture value");
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "lstm") return Architecture::kLstm;
  if (s == "gru") return Architecture::kGru;
  if (s == "lstm_gru") return Architecture::kLstmGru;
  if (s == "cnn_lstm") return Architecture::kCnnLstm;
  fail("bad_model_config", "unknown architecture: " + s);
}

const char* to_string(LinearKind kind) {
  return kind == LinearKind::kLogistic ? "logistic" : "hinge_svm";
}

void SequenceModelConfig::validate() const {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1 || head_dim < 1) {
    fail("bad_model_config", "model dimensions must be positive");
  }
  if (conv.kernel < 1 || conv.filters < 1 || conv.stride < 1) {
    fail("bad_model_config", "conv kernel/filters/stride must be positive");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    fail("bad_model_config", "dropout_p must be in [0, 1)");
  }
}

void ForestConfig::validate() const {
  if (n_trees < 1) fail("bad_forest_config", "n_trees must be >= 1");
  if (max_depth < 1) fail("bad_forest_config", "max_depth must be >= 1");
  if (min_leaf < 1) fail("bad_forest_config", "min_leaf must be >= 1");
  if (features_per_split < 0) fail("bad_forest_config", "features_per_split must be >= 0");
}

void LinearModelConfig::validate() const {
  if (l2 < 0.0) fail("bad_linear_config", "l2 must be >= 0");
  if (epochs < 1) fail("bad_linear_config", "epochs must be >= 1");
  if (!(lr > 0.0)) fail("bad_linear_config", "lr must be positive");
}

int DecisionTree::predict(const double* x) const {
  int node = 0;
  while (nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<size_t>(node)];
    node = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(node)].leaf_class;
}

namespace {

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double gini(const std::vector<int64_t>& counts, int64_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

int majority_class(const std::vector<int64_t>& counts) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(counts.size()); ++k) {
    if (counts[static_cast<size_t>(k)] > counts[static_cast<size_t>(best)]) best = k;
  }
  return best;  // ties resolve to the lowest class index
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::array<double, kFeatureDim>>& x, const std::vector<int>& y,
              int n_classes, const ForestConfig& cfg, int n_features, uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), cfg_(cfg), n_features_(n_features), rng_(seed) {}

  DecisionTree build(std::vector<int> indices) {
    DecisionTree tree;
    grow(tree, std::move(indices), 0);
    return tree;
  }

 private:
  int grow(DecisionTree& tree, std::vector<int> indices, int depth) {
    std::vector<int64_t> counts(static_cast<size_t>(n_classes_), 0);
    for (int i : indices) ++counts[static_cast<size_t>(y_[static_cast<size_t>(i)])];
    const int64_t total = static_cast<int64_t>(indices.size());

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});

    const double parent_gini = gini(counts, total);
    const bool can_split = depth < cfg_.max_depth &&
                           total >= 2 * static_cast<int64_t>(cfg_.min_leaf) && parent_gini > 0.0;
    SplitChoice choice;
    if (can_split) choice = best_split(indices, counts, parent_gini);

    if (choice.feature < 0) {
      tree.nodes[static_cast<size_t>(node_id)].leaf_class = majority_class(counts);
      return node_id;
    }

    std::vector<int> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (int i : indices) {
      if (x_[static_cast<size_t>(i)][static_cast<size_t>(choice.feature)] < choice.threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    indices.clear();
    indices.shrink_to_fit();

    tree.nodes[static_cast<size_t>(node_id)].feature = choice.feature;
    tree.nodes[static_cast<size_t>(node_id)].threshold = choice.threshold;
    const int l = grow(tree, std::move(left), depth + 1);
    tree.nodes[static_cast<size_t>(node_id)].left = l;
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[static_cast<size_t>(node_id)].right = r;
    return node_id;
  }

  SplitChoice best_split(const std::vector<int>& indices, const std::vector<int64_t>& counts,
                         double parent_gini) {
    const int mtry = cfg_.features_per_split > 0
                         ? std::min(cfg_.features_per_split, n_features_)
                         : std::max(1, static_cast<int>(std::floor(
                                           std::sqrt(static_cast<double>(n_features_)) + 0.5)));

    // sample mtry distinct features (partial Fisher-Yates, seeded)
    std::vector<int> features(static_cast<size_t>(n_features_));
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<int> pick(i, n_features_ - 1);
      std::swap(features[static_cast<size_t>(i)], features[static_cast<size_t>(pick(rng_))]);
    }

    const int64_t total = static_cast<int64_t>(indices.size());
    SplitChoice best;
    std::vector<std::pair<double, int>> order;
    order.reserve(indices.size());
    std::vector<int64_t> left_counts(static_cast<size_t>(n_classes_));

    for (int fi = 0; fi < mtry; ++fi) {
      const int feature = features[static_cast<size_t>(fi)];
      order.clear();
      for (int i : indices) {
        order.emplace_back(x_[static_cast<size_t>(i)][static_cast<size_t>(feature)], i);
      }
      std::sort(order.begin(), order.end());

      std::fill(left_counts.begin(), left_counts.end(), 0);
      int64_t n_left = 0;
      for (size_t pos = 0; pos + 1 < order.size(); ++pos) {
        ++left_counts[static_cast<size_t>(y_[static_cast<size_t>(order[pos].second)])];
        ++n_left;
        if (order[pos].first == order[pos + 1].first) continue;  // no boundary here
        const int64_t n_right = total - n_left;
        if (n_left < cfg_.min_leaf || n_right < cfg_.min_leaf) continue;

        double right_gini = 1.0;
        {
          double acc = 0.0;
          for (int k = 0; k < n_classes_; ++k) {
            const double p = static_cast<double>(counts[static_cast<size_t>(k)] -
                                                 left_counts[static_cast<size_t>(k)]) /
                             static_cast<double>(n_right);
            acc += p * p;
          }
          right_gini = 1.0 - acc;
        }
        const double left_gini = gini(left_counts, n_left);
        const double weighted = (static_cast<double>(n_left) * left_gini +
                                 static_cast<double>(n_right) * right_gini) /
                                static_cast<double>(total);
        const double gain = parent_gini - weighted;
        const double threshold = 0.5 * (order[pos].first + order[pos + 1].first);
        // deterministic tie-break: higher gain, then lower feature, then lower threshold
        const bool better =
            gain > best.gain + 1e-15 ||
            (std::abs(gain - best.gain) <= 1e-15 &&
             (feature < best.feature || (feature == best.feature && threshold < best.threshold)));
        if (gain > 1e-15 && (best.feature < 0 || better)) {
          best = SplitChoice{gain, feature, threshold};
        }
      }
    }
    return best;
  }

  const std::vector<std::array<double, kFeatureDim>>& x_;
  const std::vector<int>& y_;
  int n_classes_;
  ForestConfig cfg_;
  int n_features_;
  std::mt19937_64 rng_;
};

}  // namespace

ForestModel rf_train(const std::vector<std::array<double, kFeatureDim>>& x,
                     const std::vector<int>& y, int n_classes, const ForestConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size() || x.size() < 2) {
    fail("bad_training_data", "rf_train needs >= 2 samples with matching labels");
  }
  for (int label : y) {
    if (label < 0 || label >= n_classes) {
      fail("label_out_of_range", "label " + std::to_string(label) + " outside [0, " +
                                     std::to_string(n_classes) + ")");
    }
  }

  ForestModel model;
  model.cfg = cfg;
  model.n_classes = n_classes;
  model.n_features = kFeatureDim;
  model.trees.resize(static_cast<size_t>(cfg.n_trees));

  const int n = static_cast<int>(x.size());
  parallel_for(cfg.n_trees, [&](int64_t t) {
    const uint64_t tree_seed = derive_seed(cfg.seed, static_cast<uint64_t>(t));
    std::mt19937_64 rng(tree_seed);
    std::vector<int> indices(static_cast<size_t>(n));
    if (cfg.bootstrap) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (auto& i : indices) i = pick(rng);
    } else {
      std::iota(indices.begin(), indices.end(), 0);
    }
    TreeBuilder builder(x, y, n_classes, cfg, kFeatureDim, splitmix64(tree_seed));
    model.trees[static_cast<size_t>(t)] = builder.build(std::move(indices));
  });
  return model;
}

ForestPrediction rf_predict(const ForestModel& model, const double* x) {
  ForestPrediction out;
  out.votes.assign(static_cast<size_t>(model.n_classes), 0.0);
  for (const auto& tree : model.trees) {
    ++out.votes[static_cast<size_t>(tree.predict(x))];
  }
  int best = 0;
  for (int k = 1; k < model.n_classes; ++k) {
    if (out.votes[static_cast<size_t>(k)] > out.votes[static_cast<size_t>(best)]) best = k;
  }
  out.label = best;
  const double total = static_cast<double>(model.trees.size());
  for (auto& v : out.votes) v /= total;
  return out;
}

int LinearModel::predict(const double* x) const {
  const auto s = scores(x);
  int best = 0;
  for (int k = 1; k < n_classes; ++k) {
    if (s[static_cast<size_t>(k)] > s[static_cast<size_t>(best)]) best = k;
  }
  return best;
}

std::vector<double> LinearModel::scores(const double* x) const {
  std::vector<double> s(static_cast<size_t>(n_classes), 0.0);
  for (int k = 0; k < n_classes; ++k) {
    const double* w = weights.data() + static_cast<int64_t>(k) * n_features;
    double acc = bias[static_cast<size_t>(k)];
    for (int j = 0; j < n_features; ++j) acc += w[j] * x[j];
    s[static_cast<size_t>(k)] = acc;
  }
  return s;
}

LinearModel linear_train(const std::vector<std::array<double, kFeatureDim>>& x,
                         const std::vector<int>& y, int n_classes, const LinearModelConfig& cfg,
                         std::vector<double>* epoch_losses) {
  cfg.validate();
  if (x.size() != y.size() || x.empty()) {
    fail("bad_training_data", "linear_train needs samples with matching labels");
  }
  const int n = static_cast<int>(x.size());
  const int d = kFeatureDim;
  constexpr int kMiniBatch = 64;

  LinearModel model;
  model.kind = cfg.kind;
  model.n_classes = n_classes;
  model.n_features = d;
  model.weights.assign(static_cast<size_t>(n_classes) * d, 0.0);
  model.bias.assign(static_cast<size_t>(n_classes), 0.0);

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad_w(model.weights.size());
  std::vector<double> grad_b(model.bias.size());
  std::vector<double> scores(static_cast<size_t>(n_classes));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;

    for (int start = 0; start < n; start += kMiniBatch) {
      const int stop = std::min(n, start + kMiniBatch);
      const int batch = stop - start;
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      double batch_loss = 0.0;

      for (int bi = start; bi < stop; ++bi) {
        const int i = order[static_cast<size_t>(bi)];
        const double* xi = x[static_cast<size_t>(i)].data();
        const int yi = y[static_cast<size_t>(i)];
        for (int k = 0; k < n_classes; ++k) {
          const double* w = model.weights.data() + static_cast<int64_t>(k) * d;
          double acc = model.bias[static_cast<size_t>(k)];
          for (int j = 0; j < d; ++j) acc += w[j] * xi[j];
          scores[static_cast<size_t>(k)] = acc;
        }

        if (cfg.kind == LinearKind::kLogistic) {
          double hi = scores[0];
          for (int k = 1; k < n_classes; ++k) hi = std::max(hi, scores[static_cast<size_t>(k)]);
          double sum = 0.0;
          for (int k = 0; k < n_classes; ++k) {
            scores[static_cast<size_t>(k)] = std::exp(scores[static_cast<size_t>(k)] - hi);
            sum += scores[static_cast<size_t>(k)];
          }
          batch_loss += -std::log(scores[static_cast<size_t>(yi)] / sum);
          for (int k = 0; k < n_classes; ++k) {
            const double p = scores[static_cast<size_t>(k)] / sum;
            const double delta = p - (k == yi ? 1.0 : 0.0);
            double* gw = grad_w.data() + static_cast<int64_t>(k) * d;
            for (int j = 0; j < d; ++j) gw[j] += delta * xi[j];
            grad_b[static_cast<size_t>(k)] += delta;
          }
        } else {
          // one-vs-rest hinge; class k is positive iff k == yi
          for (int k = 0; k < n_classes; ++k) {
            const double target = k == yi ? 1.0 : -1.0;
            const double margin = 1.0 - target * scores[static_cast<size_t>(k)];
            if (margin > 0.0) {
              batch_loss += margin;
              double* gw = grad_w.data() + static_cast<int64_t>(k) * d;
              for (int j = 0; j < d; ++j) gw[j] -= target * xi[j];
              grad_b[static_cast<size_t>(k)] -= target;
            }
          }
        }
      }

      const double inv_batch = 1.0 / static_cast<double>(batch);
      for (int k = 0; k < n_classes; ++k) {
        double* w = model.weights.data() + static_cast<int64_t>(k) * d;
        const double* gw = grad_w.data() + static_cast<int64_t>(k) * d;
        for (int j = 0; j < d; ++j) {
          w[j] -= cfg.lr * (gw[j] * inv_batch + cfg.l2 * w[j]);
        }
        model.bias[static_cast<size_t>(k)] -=
            cfg.lr * grad_b[static_cast<size_t>(k)] * inv_batch;
      }
      epoch_loss += batch_loss;
    }
    if (epoch_losses) epoch_losses->push_back(epoch_loss / n);
  }
  return model;
}

}  // namespace eegaffect
