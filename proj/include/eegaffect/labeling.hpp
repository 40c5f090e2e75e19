#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "eegaffect/data_ingest.hpp"
#include "eegaffect/segmentation.hpp"

namespace eegaffect {

enum class Emotion { kBoring = 0, kHorrible = 1, kCalm = 2, kFunny = 3 };

const char* to_string(Emotion e);
Emotion emotion_from_string(const std::string& s);

struct BinningConfig {
  int n_bins = 10;  // ratings in [0, 10]; value 10 clamps into bin n_bins - 1

  void validate() const;  // throws Error("bad_binning_config") when n_bins < 2
};

struct LabelSet {
  int binary_valence = 0;                  // {0, 1}
  Emotion categorical = Emotion::kBoring;  // argmax over the four ratings
  std::array<int, 4> ordinal_bins{};       // order (boring, horrible, calm, funny)
};

// 1 iff mean(funny, calm) strictly exceeds mean(boring, horrible); ties -> 0.
int encode_binary(const RatingVector& r);

// Argmax over (boring, horrible, calm, funny); ties break toward the earliest
// field in that order.
Emotion encode_categorical(const RatingVector& r);

// bin(v) = min(floor(v * B / 10), B - 1) per emotion.
std::array<int, 4> encode_ordinal(const RatingVector& r, const BinningConfig& cfg);

// Concatenation of four one-hot groups of width B; exactly one 1 per group.
std::vector<int> to_multihot(const std::array<int, 4>& bins, int n_bins);

LabelSet encode_labels(const RatingVector& r, const BinningConfig& cfg);

struct SplitAssignment {
  std::set<std::string> train_subjects;
  std::set<std::string> eval_subjects;
  double ratio = 0.8;
  uint64_t seed = 0;

  bool is_train(const std::string& subject) const { return train_subjects.count(subject) > 0; }
};

// Deterministic seeded shuffle; round(ratio * n) subjects go to train with at
// least one subject on each side. Throws Error("too_few_subjects") for n < 2.
SplitAssignment subject_split(const std::set<std::string>& subjects, double ratio, uint64_t seed);

// Every window of a session inherits that session's labels unchanged.
std::vector<std::pair<Window, LabelSet>> broadcast_labels(const LabelSet& session_label,
                                                          const std::vector<Window>& windows);

}  // namespace eegaffect
