#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegaffect/data_ingest.hpp"
#include "eegaffect/features.hpp"
#include "eegaffect/labeling.hpp"
#include "eegaffect/models.hpp"
#include "eegaffect/segmentation.hpp"

namespace eegaffect {

// One featurized window with its session labels. Features are stored raw;
// normalization happens when model inputs are assembled.
struct WindowRow {
  std::string subject_id;
  GameId game_id = GameId::kG1;
  int window_index = 0;
  int padded_samples = 0;
  std::array<double, kFeatureDim> features{};
  LabelSet labels;
};

struct FeaturizedDataset {
  std::vector<WindowRow> rows;  // ordered by (subject, game, window)
  SplitAssignment split;
  NormalizationStats stats;  // fitted on train-subject rows only
  double sampling_rate_hz = kDefaultSamplingRateHz;
  int window_samples = 0;
  int hop_samples = 0;
  int n_bins = 10;
};

// Full phase-1/2 pass: segment every session, extract features, encode
// labels, draw the subject split, and fit normalization on the train side.
FeaturizedDataset featurize_sessions(const std::vector<Session>& sessions,
                                     const SegmentConfig& seg_cfg, const BinningConfig& bin_cfg,
                                     double split_ratio, uint64_t seed);

// featurize output files: features.csv, labels.csv, norm_stats.json
void write_featurized(const FeaturizedDataset& data, const std::filesystem::path& dir);
FeaturizedDataset load_featurized(const std::filesystem::path& dir);

enum class SplitSide { kTrain, kEval, kAll };

SplitSide split_side_from_string(const std::string& s);
const char* to_string(SplitSide side);

// Normalized, per-session chunks of seq_len consecutive windows (remainder
// windows at the session tail are dropped). Sequences never cross sessions.
SequenceDataset assemble_sequences(const FeaturizedDataset& data, int seq_len, SplitSide side);

// Normalized window-level matrix for the classical models.
struct FlatDataset {
  std::vector<std::array<double, kFeatureDim>> x;
  std::vector<LabelSet> labels;
};

FlatDataset flat_windows(const FeaturizedDataset& data, SplitSide side);

}  // namespace eegaffect
