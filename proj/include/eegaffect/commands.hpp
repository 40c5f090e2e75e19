#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegaffect/evaluation.hpp"
#include "eegaffect/pipeline.hpp"
#include "eegaffect/run_config.hpp"
#include "eegaffect/training.hpp"

namespace eegaffect {

// Model names the train/eval/report commands accept.
inline const std::vector<std::string>& known_models() {
  static const std::vector<std::string> names = {"lstm",     "gru", "lstm_gru", "cnn_lstm",
                                                 "logistic", "svm", "forest"};
  return names;
}

bool is_deep_model(const std::string& model_name);

// Every command writes into <out_base>/<command>-<run_id>/ where run_id
// hashes the fully resolved config (stage settings, command, arguments), and
// drops resolved_config.json next to its outputs.
struct CommandResult {
  std::filesystem::path run_dir;
};

// Generates a synthetic dataset tree (GAMEEMO layout + ratings.csv +
// synth_spec.json) under <run_dir>/data.
CommandResult cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_base);

// Phases 1-2 over a dataset tree: windows -> features.csv + labels.csv +
// norm_stats.json (normalization fitted on train subjects only).
CommandResult cmd_featurize(const RunConfig& cfg, const std::filesystem::path& data_dir,
                            const std::filesystem::path& rating_sidecar,
                            const std::filesystem::path& out_base);

// Trains one model on one task; writes checkpoint (+ curves.csv for models
// with epochs) into the run dir.
struct TrainOutcome {
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint_stem;
  std::vector<EpochLog> logs;
};

TrainOutcome cmd_train(const RunConfig& cfg, const std::filesystem::path& features_dir, Task task,
                       const std::string& model_name, const std::filesystem::path& out_base);

// Scores a checkpoint on one side of the subject split and exports
// metrics_/confusion_ files.
struct EvalOutcome {
  std::filesystem::path run_dir;
  MetricReport report;
};

EvalOutcome cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint_stem,
                     const std::filesystem::path& features_dir, Task task, SplitSide side,
                     const std::filesystem::path& out_base);

// Reproduction harness: featurize a user-supplied dataset, train every model
// on every task, and print a comparison table against published reference
// results. Informational only; nothing here gates.
CommandResult cmd_report(const RunConfig& cfg, const std::filesystem::path& data_dir,
                         const std::filesystem::path& rating_sidecar,
                         const std::filesystem::path& out_base);

}  // namespace eegaffect
