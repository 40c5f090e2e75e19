#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "eegaffect/data_ingest.hpp"
#include "eegaffect/labeling.hpp"
#include "eegaffect/models.hpp"
#include "eegaffect/segmentation.hpp"
#include "eegaffect/training.hpp"

namespace eegaffect {

// Every stage config in one place. Loaded from JSON with strict validation:
// unknown keys are rejected at every level so typos cannot silently fall
// back to defaults. CLI flags override file values.
struct RunConfig {
  uint64_t seed = 0;
  double sampling_rate_hz = kDefaultSamplingRateHz;
  std::string precision = "f32";  // training float width: "f32" or "f64"
  int seq_len = 10;               // consecutive windows per model sequence
  double split_ratio = 0.8;

  SegmentConfig segmentation;
  BinningConfig binning;
  SequenceModelConfig sequence;  // head_dim resolved from the task at train time
  TrainConfig train;
  ForestConfig forest;
  LinearModelConfig linear;
  SynthSpec synth;

  void validate() const;
};

RunConfig default_run_config();

// Strict parse; throws Error("config_error") on unknown keys, wrong types or
// invalid values.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j);

// Full round-trippable dump; also the byte source for run ids.
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Content address of a run: fnv1a64 hex over the resolved config JSON
// (command name and paths included by the caller).
std::string run_id(const nlohmann::json& resolved);

}  // namespace eegaffect
