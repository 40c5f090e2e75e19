#pragma once

// Template implementation for SequenceModel and the recurrent cell steps.
// Included at the end of models.hpp; not a standalone header.

#include <cmath>

namespace eegaffect {

namespace seq {

// Weights recorded on a tape. Parameters are bound once per tape and the
// resulting vars reused across time steps; gradients still accumulate over
// every use.
template <typename T>
struct BoundLstm {
  ad::Var w, b;
  int hidden = 0;
};

template <typename T>
struct BoundGru {
  ad::Var w_zr, b_zr, w_n, u_n, b_n;
  int hidden = 0;
};

template <typename T>
BoundLstm<T> bind(ad::Tape<T>& tape, const LstmCell<T>& cell) {
  return BoundLstm<T>{tape.param(*cell.w), tape.param(*cell.b), cell.hidden};
}

template <typename T>
BoundGru<T> bind(ad::Tape<T>& tape, const GruCell<T>& cell) {
  return BoundGru<T>{tape.param(*cell.w_zr), tape.param(*cell.b_zr), tape.param(*cell.w_n),
                     tape.param(*cell.u_n), tape.param(*cell.b_n), cell.hidden};
}

template <typename T>
std::pair<ad::Var, ad::Var> lstm_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, ad::Var c,
                                      const BoundLstm<T>& cell) {
  const int hidden = cell.hidden;
  ad::Var xh = ad::concat(tape, {x, h});
  ad::Var z = ad::add(tape, ad::matmul(tape, xh, cell.w), cell.b);
  ad::Var gate_i = ad::sigmoid(tape, ad::slice(tape, z, 0, hidden));
  ad::Var gate_f = ad::sigmoid(tape, ad::slice(tape, z, hidden, hidden));
  ad::Var cand_g = ad::tanh(tape, ad::slice(tape, z, 2 * hidden, hidden));
  ad::Var gate_o = ad::sigmoid(tape, ad::slice(tape, z, 3 * hidden, hidden));
  ad::Var c_next = ad::add(tape, ad::mul(tape, gate_f, c), ad::mul(tape, gate_i, cand_g));
  ad::Var h_next = ad::mul(tape, gate_o, ad::tanh(tape, c_next));
  return {h_next, c_next};
}

template <typename T>
std::pair<ad::Var, ad::Var> lstm_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, ad::Var c,
                                      const LstmCell<T>& cell) {
  return lstm_step(tape, x, h, c, bind(tape, cell));
}

template <typename T>
ad::Var one_minus(ad::Tape<T>& tape, ad::Var z) {
  ad::Var neg = ad::mul(tape, z, tape.leaf(ad::Tensor<T>::scalar(T(-1))));
  return ad::add(tape, neg, tape.leaf(ad::Tensor<T>::scalar(T(1))));
}

template <typename T>
ad::Var gru_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, const BoundGru<T>& cell) {
  const int hidden = cell.hidden;
  ad::Var xh = ad::concat(tape, {x, h});
  ad::Var zr = ad::sigmoid(tape, ad::add(tape, ad::matmul(tape, xh, cell.w_zr), cell.b_zr));
  ad::Var update = ad::slice(tape, zr, 0, hidden);
  ad::Var reset = ad::slice(tape, zr, hidden, hidden);
  ad::Var gated_h = ad::mul(tape, reset, h);
  ad::Var cand = ad::tanh(
      tape, ad::add(tape,
                    ad::add(tape, ad::matmul(tape, x, cell.w_n),
                            ad::matmul(tape, gated_h, cell.u_n)),
                    cell.b_n));
  ad::Var keep = ad::mul(tape, one_minus(tape, update), h);
  return ad::add(tape, keep, ad::mul(tape, update, cand));
}

template <typename T>
ad::Var gru_step(ad::Tape<T>& tape, ad::Var x, ad::Var h, const GruCell<T>& cell) {
  return gru_step(tape, x, h, bind(tape, cell));
}

}  // namespace seq

template <typename T>
ad::Parameter<T>& SequenceModel<T>::add_matrix(const std::string& name, int rows, int cols,
                                               std::mt19937_64& rng) {
  ad::Tensor<T> w(ad::Shape{rows, cols});
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (auto& v : w.data) v = static_cast<T>(uni(rng));
  params_.push_back(std::make_unique<ad::Parameter<T>>(name, std::move(w), /*apply_decay=*/true));
  return *params_.back();
}

template <typename T>
ad::Parameter<T>& SequenceModel<T>::add_bias(const std::string& name, int dim) {
  params_.push_back(std::make_unique<ad::Parameter<T>>(name, ad::Tensor<T>(ad::Shape{dim}),
                                                       /*apply_decay=*/false));
  return *params_.back();
}

template <typename T>
SequenceModel<T>::SequenceModel(const SequenceModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);

  int lstm_in = cfg_.input_dim;
  if (cfg_.architecture == Architecture::kCnnLstm) {
    conv_w_ = &add_matrix("conv_w", cfg_.conv.kernel * cfg_.input_dim, cfg_.conv.filters, rng);
    conv_b_ = &add_bias("conv_b", cfg_.conv.filters);
    lstm_in = cfg_.conv.filters;
  }

  int last_hidden = cfg_.hidden1;
  if (cfg_.architecture == Architecture::kGru) {
    gru_.input_dim = cfg_.input_dim;
    gru_.hidden = cfg_.hidden1;
    gru_.w_zr = &add_matrix("gru_w_zr", gru_.input_dim + gru_.hidden, 2 * gru_.hidden, rng);
    gru_.b_zr = &add_bias("gru_b_zr", 2 * gru_.hidden);
    gru_.w_n = &add_matrix("gru_w_n", gru_.input_dim, gru_.hidden, rng);
    gru_.u_n = &add_matrix("gru_u_n", gru_.hidden, gru_.hidden, rng);
    gru_.b_n = &add_bias("gru_b_n", gru_.hidden);
  } else {
    lstm_.input_dim = lstm_in;
    lstm_.hidden = cfg_.hidden1;
    lstm_.w = &add_matrix("lstm_w", lstm_.input_dim + lstm_.hidden, 4 * lstm_.hidden, rng);
    lstm_.b = &add_bias("lstm_b", 4 * lstm_.hidden);
    if (cfg_.architecture == Architecture::kLstmGru) {
      gru_.input_dim = cfg_.hidden1;
      gru_.hidden = cfg_.hidden2;
      gru_.w_zr = &add_matrix("gru_w_zr", gru_.input_dim + gru_.hidden, 2 * gru_.hidden, rng);
      gru_.b_zr = &add_bias("gru_b_zr", 2 * gru_.hidden);
      gru_.w_n = &add_matrix("gru_w_n", gru_.input_dim, gru_.hidden, rng);
      gru_.u_n = &add_matrix("gru_u_n", gru_.hidden, gru_.hidden, rng);
      gru_.b_n = &add_bias("gru_b_n", gru_.hidden);
      last_hidden = cfg_.hidden2;
    }
  }

  head_w_ = &add_matrix("head_w", last_hidden, cfg_.head_dim, rng);
  head_b_ = &add_bias("head_b", cfg_.head_dim);
}

template <typename T>
ad::Var SequenceModel<T>::forward(ad::Tape<T>& tape, const ad::Tensor<T>& features,
                                  bool train_mode, std::mt19937_64& rng) {
  if (features.shape.size() != 3 || features.shape[2] != cfg_.input_dim) {
    fail("shape_mismatch", "sequence batch must be [batch, seq, " +
                               std::to_string(cfg_.input_dim) + "], got " +
                               ad::shape_str(features.shape));
  }
  const int batch = features.shape[0];
  const int seq_len = features.shape[1];
  const int dim = cfg_.input_dim;

  // Inputs carry no gradient: split the batch into per-step constant leaves.
  std::vector<ad::Var> steps;
  steps.reserve(static_cast<size_t>(seq_len));
  for (int s = 0; s < seq_len; ++s) {
    ad::Tensor<T> xt(ad::Shape{batch, dim});
    for (int b = 0; b < batch; ++b) {
      const T* src = features.data.data() + (static_cast<int64_t>(b) * seq_len + s) * dim;
      std::copy_n(src, dim, xt.data.data() + static_cast<int64_t>(b) * dim);
    }
    steps.push_back(tape.leaf(std::move(xt)));
  }

  if (cfg_.architecture == Architecture::kCnnLstm) {
    // valid 1-D convolution over the time axis as concat + matmul
    if (seq_len < cfg_.conv.kernel) {
      fail("shape_mismatch", "seq_len " + std::to_string(seq_len) + " shorter than conv kernel " +
                                 std::to_string(cfg_.conv.kernel));
    }
    ad::Var w = tape.param(*conv_w_);
    ad::Var b = tape.param(*conv_b_);
    std::vector<ad::Var> conv_steps;
    for (int s = 0; s + cfg_.conv.kernel <= seq_len; s += cfg_.conv.stride) {
      std::vector<ad::Var> taps(steps.begin() + s, steps.begin() + s + cfg_.conv.kernel);
      ad::Var window = ad::concat(tape, taps);
      conv_steps.push_back(ad::relu(tape, ad::add(tape, ad::matmul(tape, window, w), b)));
    }
    steps = std::move(conv_steps);
  }

  ad::Var last;
  if (cfg_.architecture == Architecture::kGru) {
    const auto cell = seq::bind(tape, gru_);
    ad::Var h = tape.leaf(ad::Tensor<T>(ad::Shape{batch, gru_.hidden}));
    for (ad::Var x : steps) h = seq::gru_step(tape, x, h, cell);
    last = h;
  } else {
    const auto cell = seq::bind(tape, lstm_);
    ad::Var h = tape.leaf(ad::Tensor<T>(ad::Shape{batch, lstm_.hidden}));
    ad::Var c = tape.leaf(ad::Tensor<T>(ad::Shape{batch, lstm_.hidden}));
    std::vector<ad::Var> outputs;
    outputs.reserve(steps.size());
    for (ad::Var x : steps) {
      auto hc = seq::lstm_step(tape, x, h, c, cell);
      h = hc.first;
      c = hc.second;
      outputs.push_back(h);
    }
    if (cfg_.architecture == Architecture::kLstmGru) {
      const auto gru_cell = seq::bind(tape, gru_);
      ad::Var g = tape.leaf(ad::Tensor<T>(ad::Shape{batch, gru_.hidden}));
      for (ad::Var x : outputs) g = seq::gru_step(tape, x, g, gru_cell);
      last = g;
    } else {
      last = h;
    }
  }

  last = ad::dropout(tape, last, cfg_.dropout_p, train_mode, rng);
  return ad::add(tape, ad::matmul(tape, last, tape.param(*head_w_)), tape.param(*head_b_));
}

template <typename T>
std::vector<ad::Parameter<T>*> SequenceModel<T>::parameters() {
  std::vector<ad::Parameter<T>*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <typename T>
std::vector<std::pair<std::string, ad::Shape>> SequenceModel<T>::layout() const {
  std::vector<std::pair<std::string, ad::Shape>> out;
  for (const auto& p : params_) out.emplace_back(p->name, p->value.shape);
  return out;
}

template <typename T>
int64_t SequenceModel<T>::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.numel();
  return n;
}

template <typename T>
std::vector<float> SequenceModel<T>::export_f32() const {
  std::vector<float> flat;
  flat.reserve(static_cast<size_t>(parameter_count()));
  for (const auto& p : params_) {
    for (T v : p->value.data) flat.push_back(static_cast<float>(v));
  }
  return flat;
}

template <typename T>
void SequenceModel<T>::import_f32(const std::vector<float>& flat) {
  if (static_cast<int64_t>(flat.size()) != parameter_count()) {
    fail("bad_checkpoint", "parameter count mismatch: checkpoint has " +
                               std::to_string(flat.size()) + ", model needs " +
                               std::to_string(parameter_count()));
  }
  size_t i = 0;
  for (auto& p : params_) {
    for (auto& v : p->value.data) v = static_cast<T>(flat[i++]);
  }
}

}  // namespace eegaffect
