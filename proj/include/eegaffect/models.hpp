#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eegaffect/autodiff.hpp"
#include "eegaffect/features.hpp"
#include "eegaffect/labeling.hpp"

namespace eegaffect {

enum class Architecture { kLstm, kGru, kLstmGru, kCnnLstm };

const char* to_string(Architecture arch);
Architecture architecture_from_string(const std::string& s);

struct ConvConfig {
  int kernel = 3;
  int filters = 32;
  int stride = 1;
};

struct SequenceModelConfig {
  Architecture architecture = Architecture::kLstmGru;
  int input_dim = kFeatureDim;
  int hidden1 = 64;
  int hidden2 = 32;
  ConvConfig conv;
  int head_dim = 1;  // 1 binary, 4 categorical, 4 * n_bins multilabel
  double dropout_p = 0.3;
  uint64_t seed = 0;

  void validate() const;  // throws Error("bad_model_config")
};

// One training sample: seq_len consecutive windows of one session. Assembly
// never crosses session boundaries.
struct SequenceSample {
  std::string subject_id;
  GameId game_id = GameId::kG1;
  std::vector<std::array<double, kFeatureDim>> steps;
  LabelSet labels;
};

using SequenceDataset = std::vector<SequenceSample>;

namespace seq {

// Gate order inside the packed weight matrices (and the checkpoint layout):
// LSTM (input, forget, cell, output), GRU (update, reset) then candidate.
template <typename T>
struct LstmCell {
  ad::Parameter<T>* w = nullptr;  // [(in + hidden) x 4 * hidden]
  ad::Parameter<T>* b = nullptr;  // [4 * hidden]
  int input_dim = 0;
  int hidden = 0;
};

template <typename T>
struct GruCell {
  ad::Parameter<T>* w_zr = nullptr;  // [(in + hidden) x 2 * hidden]
  ad::Parameter<T>* b_zr = nullptr;  // [2 * hidden]
  ad::Parameter<T>* w_n = nullptr;   // [in x hidden]
  ad::Parameter<T>* u_n = nullptr;   // [hidden x hidden]
  ad::Parameter<T>* b_n = nullptr;   // [hidden]
  int input_dim = 0;
  int hidden = 0;
};

// Standard gated recurrences: sigmoid gates, tanh candidates.
//   LSTM: c' = f*c + i*g, h' = o * tanh(c')
//   GRU:  h' = (1 - z) * h + z * n,  n = tanh(W_n x + U_n (r * h) + b_n)
template <typename T>
std::pair<ad::Var, ad::Var> lstm_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, ad::Var c,
                                      const LstmCell<T>& cell);

template <typename T>
ad::Var gru_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, const GruCell<T>& cell);

}  // namespace seq

// A parameterized sequence classifier on the differentiation tape.
//   lstm / gru:  recurrent layer (hidden1) -> last hidden -> dropout -> head
//   lstm_gru:    LSTM(hidden1) -> GRU(hidden2) over LSTM outputs -> last
//                hidden -> dropout -> head
//   cnn_lstm:    1-D conv over time (valid, kernel/filters/stride from
//                config) -> relu -> LSTM(hidden1) -> last hidden -> dropout
//                -> head
template <typename T>
class SequenceModel {
 public:
  explicit SequenceModel(const SequenceModelConfig& cfg);

  // features shape {batch, seq_len, input_dim}; returns logits
  // {batch, head_dim}. rng drives dropout in train mode only.
  ad::Var forward(ad::Tape<T>& tape, const ad::Tensor<T>& features, bool train_mode,
                  std::mt19937_64& rng);

  std::vector<ad::Parameter<T>*> parameters();
  const SequenceModelConfig& config() const { return cfg_; }

  // Checkpoint order = parameter creation order; layout() names it.
  std::vector<std::pair<std::string, ad::Shape>> layout() const;
  std::vector<float> export_f32() const;
  void import_f32(const std::vector<float>& flat);

  int64_t parameter_count() const;

 private:
  ad::Parameter<T>& add_matrix(const std::string& name, int rows, int cols, std::mt19937_64& rng);
  ad::Parameter<T>& add_bias(const std::string& name, int dim);

  SequenceModelConfig cfg_;
  std::vector<std::unique_ptr<ad::Parameter<T>>> params_;
  seq::LstmCell<T> lstm_;
  seq::GruCell<T> gru_;
  ad::Parameter<T>* conv_w_ = nullptr;
  ad::Parameter<T>* conv_b_ = nullptr;
  ad::Parameter<T>* head_w_ = nullptr;
  ad::Parameter<T>* head_b_ = nullptr;
};

// ---------------------------------------------------------------------------
// classical baselines (double precision; no tape involved)

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  int features_per_split = 0;  // 0 -> round(sqrt(d))
  bool bootstrap = true;
  uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0; // go left when x[feature] < threshold
  int left = -1;
  int right = -1;
  int leaf_class = -1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  int predict(const double* x) const;
};

struct ForestModel {
  ForestConfig cfg;
  int n_classes = 0;
  int n_features = 0;
  std::vector<DecisionTree> trees;
};

struct ForestPrediction {
  int label = 0;
  std::vector<double> votes;  // normalized vote distribution, sums to 1
};

// Bootstrap resamples, Gini-gain splits over features_per_split random
// features, majority leaves. Trees train in parallel with per-tree seeds so
// results do not depend on scheduling.
ForestModel rf_train(const std::vector<std::array<double, kFeatureDim>>& x,
                     const std::vector<int>& y, int n_classes, const ForestConfig& cfg);

// Plurality vote over trees; ties resolve to the lowest class index.
ForestPrediction rf_predict(const ForestModel& model, const double* x);

enum class LinearKind { kLogistic, kHingeSvm };

const char* to_string(LinearKind kind);

struct LinearModelConfig {
  LinearKind kind = LinearKind::kLogistic;
  double l2 = 1e-4;
  int epochs = 200;
  double lr = 0.05;
  uint64_t seed = 0;

  void validate() const;
};

struct LinearModel {
  LinearKind kind = LinearKind::kLogistic;
  int n_classes = 0;
  int n_features = 0;
  std::vector<double> weights;  // [n_classes x n_features], row-major
  std::vector<double> bias;     // [n_classes]

  int predict(const double* x) const;
  std::vector<double> scores(const double* x) const;
};

// Mini-batch gradient descent (batches of 64), deterministic given seed.
// kLogistic minimizes softmax cross-entropy + l2, kHingeSvm one-vs-rest
// hinge + l2; l2 never applies to biases. Returns per-epoch mean train loss.
LinearModel linear_train(const std::vector<std::array<double, kFeatureDim>>& x,
                         const std::vector<int>& y, int n_classes, const LinearModelConfig& cfg,
                         std::vector<double>* epoch_losses = nullptr);

}  // namespace eegaffect

#include "eegaffect/models_seq_impl.hpp"
