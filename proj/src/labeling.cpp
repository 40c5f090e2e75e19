#include "eegaffect/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eegaffect/error.hpp"

namespace eegaffect {

const char* to_string(Emotion e) {
  switch (e) {
    case Emotion::kBoring: return "boring";
    case Emotion::kHorrible: return "horrible";
    case Emotion::kCalm: return "calm";
    case Emotion::kFunny: return "funny";
  }
  fail("bad_emotion", "invalid emotion value");
}

Emotion emotion_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    if (s == kEmotionNames[i]) return static_cast<Emotion>(i);
  }
  fail("bad_emotion", "unknown emotion name: " + s);
}

void BinningConfig::validate() const {
  if (n_bins < 2) fail("bad_binning_config", "n_bins must be >= 2, got " + std::to_string(n_bins));
}

int encode_binary(const RatingVector& r) {
  const double positive = 0.5 * (r.funny + r.calm);
  const double negative = 0.5 * (r.boring + r.horrible);
  return positive > negative ? 1 : 0;
}

Emotion encode_categorical(const RatingVector& r) {
  const double values[4] = {r.boring, r.horrible, r.calm, r.funny};
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<Emotion>(best);
}

std::array<int, 4> encode_ordinal(const RatingVector& r, const BinningConfig& cfg) {
  cfg.validate();
  const double values[4] = {r.boring, r.horrible, r.calm, r.funny};
  std::array<int, 4> bins{};
  for (int i = 0; i < 4; ++i) {
    const int b = static_cast<int>(std::floor(values[i] * cfg.n_bins / 10.0));
    bins[static_cast<size_t>(i)] = std::min(b, cfg.n_bins - 1);
  }
  return bins;
}

std::vector<int> to_multihot(const std::array<int, 4>& bins, int n_bins) {
  std::vector<int> out(static_cast<size_t>(4 * n_bins), 0);
  for (int g = 0; g < 4; ++g) {
    const int b = bins[static_cast<size_t>(g)];
    if (b < 0 || b >= n_bins) {
      fail("bad_bin", "bin " + std::to_string(b) + " out of range for B=" + std::to_string(n_bins));
    }
    out[static_cast<size_t>(g * n_bins + b)] = 1;
  }
  return out;
}

LabelSet encode_labels(const RatingVector& r, const BinningConfig& cfg) {
  LabelSet labels;
  labels.binary_valence = encode_binary(r);
  labels.categorical = encode_categorical(r);
  labels.ordinal_bins = encode_ordinal(r, cfg);
  return labels;
}

SplitAssignment subject_split(const std::set<std::string>& subjects, double ratio, uint64_t seed) {
  const int n = static_cast<int>(subjects.size());
  if (n < 2) fail("too_few_subjects", "need >= 2 subjects to split, got " + std::to_string(n));
  if (!(ratio > 0.0 && ratio < 1.0)) fail("bad_split_ratio", "ratio must be in (0, 1)");

  std::vector<std::string> order(subjects.begin(), subjects.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  int n_train = static_cast<int>(std::floor(ratio * n + 0.5));
  n_train = std::clamp(n_train, 1, n - 1);

  SplitAssignment split;
  split.ratio = ratio;
  split.seed = seed;
  for (int i = 0; i < n; ++i) {
    auto& side = i < n_train ? split.train_subjects : split.eval_subjects;
    side.insert(order[static_cast<size_t>(i)]);
  }
  return split;
}

std::vector<std::pair<Window, LabelSet>> broadcast_labels(const LabelSet& session_label,
                                                          const std::vector<Window>& windows) {
  std::vector<std::pair<Window, LabelSet>> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.emplace_back(w, session_label);
  return out;
}

}  // namespace eegaffect
