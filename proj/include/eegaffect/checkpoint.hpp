#pragma once

// Checkpoint formats:
//  - sequence + linear models: <stem>.json manifest (kind, config, parameter
//    layout) and <stem>.bin, flat float32 little-endian values in manifest
//    order.
//  - forests: <stem>.json only, trees as JSON node lists
//    [feature, threshold, left, right, leaf_class].

#include <filesystem>
#include <string>
#include <vector>

#include "eegaffect/autodiff.hpp"
#include "eegaffect/models.hpp"

namespace eegaffect {

inline constexpr int kCheckpointFormatVersion = 1;

// Reads the manifest's "kind": "sequence", "linear" or "forest".
std::string checkpoint_kind(const std::filesystem::path& stem);

void save_sequence_checkpoint(const SequenceModelConfig& cfg,
                              const std::vector<std::pair<std::string, ad::Shape>>& layout,
                              const std::vector<float>& flat_params,
                              const std::filesystem::path& stem);

struct LoadedSequenceCheckpoint {
  SequenceModelConfig config;
  std::vector<float> flat_params;
};

LoadedSequenceCheckpoint load_sequence_checkpoint(const std::filesystem::path& stem);

void save_linear_checkpoint(const LinearModel& model, const LinearModelConfig& cfg,
                            const std::filesystem::path& stem);
LinearModel load_linear_checkpoint(const std::filesystem::path& stem);

void save_forest_checkpoint(const ForestModel& model, const std::filesystem::path& stem);
ForestModel load_forest_checkpoint(const std::filesystem::path& stem);

template <typename T>
void save_model_checkpoint(const SequenceModel<T>& model, const std::filesystem::path& stem) {
  save_sequence_checkpoint(model.config(), model.layout(), model.export_f32(), stem);
}

}  // namespace eegaffect
