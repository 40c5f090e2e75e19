#include "eegaffect/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "eegaffect/error.hpp"

namespace eegaffect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(sizeof(float) == 4);

void write_f32_le(const fs::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io_error", "cannot write " + path.string());
  for (float v : values) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    char bytes[4];
    std::memcpy(bytes, &bits, 4);
    out.write(bytes, 4);
  }
  if (!out) fail("io_error", "write failed: " + path.string());
}

std::vector<float> read_f32_le(const fs::path& path, size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("missing_checkpoint", "cannot open " + path.string());
  std::vector<float> values(expected);
  for (auto& v : values) {
    char bytes[4];
    in.read(bytes, 4);
    if (!in) fail("bad_checkpoint", path.string() + " is shorter than its manifest claims");
    uint32_t bits;
    std::memcpy(&bits, bytes, 4);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    std::memcpy(&v, &bits, 4);
  }
  char extra;
  if (in.read(&extra, 1)) fail("bad_checkpoint", path.string() + " is longer than its manifest claims");
  return values;
}

json read_manifest(const fs::path& stem) {
  const fs::path path = fs::path(stem.string() + ".json");
  std::ifstream in(path);
  if (!in) fail("missing_checkpoint", "no checkpoint manifest at " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail("bad_checkpoint", path.string() + " is not valid JSON");
  if (j.value("format_version", 0) != kCheckpointFormatVersion) {
    fail("bad_checkpoint", "unsupported checkpoint format version in " + path.string());
  }
  return j;
}

void write_manifest(const fs::path& stem, const json& j) {
  const fs::path path = fs::path(stem.string() + ".json");
  std::ofstream out(path);
  if (!out) fail("io_error", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

std::string checkpoint_kind(const fs::path& stem) {
  return read_manifest(stem).at("kind").get<std::string>();
}

void save_sequence_checkpoint(const SequenceModelConfig& cfg,
                              const std::vector<std::pair<std::string, ad::Shape>>& layout,
                              const std::vector<float>& flat_params, const fs::path& stem) {
  json params = json::array();
  int64_t total = 0;
  for (const auto& [name, shape] : layout) {
    params.push_back({{"name", name}, {"shape", shape}});
    total += ad::shape_numel(shape);
  }
  if (total != static_cast<int64_t>(flat_params.size())) {
    fail("bad_checkpoint", "layout does not match flat parameter count");
  }
  const json j = {
      {"format_version", kCheckpointFormatVersion},
      {"kind", "sequence"},
      {"architecture", to_string(cfg.architecture)},
      {"config",
       {{"input_dim", cfg.input_dim},
        {"hidden1", cfg.hidden1},
        {"hidden2", cfg.hidden2},
        {"conv", {{"kernel", cfg.conv.kernel}, {"filters", cfg.conv.filters}, {"stride", cfg.conv.stride}}},
        {"head_dim", cfg.head_dim},
        {"dropout_p", cfg.dropout_p},
        {"seed", cfg.seed}}},
      {"dtype", "f32le"},
      {"parameters", params},
      {"n_values", flat_params.size()},
  };
  write_manifest(stem, j);
  write_f32_le(fs::path(stem.string() + ".bin"), flat_params);
}

LoadedSequenceCheckpoint load_sequence_checkpoint(const fs::path& stem) {
  const json j = read_manifest(stem);
  if (j.at("kind") != "sequence") fail("bad_checkpoint", "not a sequence checkpoint: " + stem.string());

  LoadedSequenceCheckpoint out;
  out.config.architecture = architecture_from_string(j.at("architecture").get<std::string>());
  const auto& cfg = j.at("config");
  out.config.input_dim = cfg.at("input_dim").get<int>();
  out.config.hidden1 = cfg.at("hidden1").get<int>();
  out.config.hidden2 = cfg.at("hidden2").get<int>();
  out.config.conv.kernel = cfg.at("conv").at("kernel").get<int>();
  out.config.conv.filters = cfg.at("conv").at("filters").get<int>();
  out.config.conv.stride = cfg.at("conv").at("stride").get<int>();
  out.config.head_dim = cfg.at("head_dim").get<int>();
  out.config.dropout_p = cfg.at("dropout_p").get<double>();
  out.config.seed = cfg.at("seed").get<uint64_t>();
  out.flat_params = read_f32_le(fs::path(stem.string() + ".bin"), j.at("n_values").get<size_t>());
  return out;
}

void save_linear_checkpoint(const LinearModel& model, const LinearModelConfig& cfg,
                            const fs::path& stem) {
  const json j = {
      {"format_version", kCheckpointFormatVersion},
      {"kind", "linear"},
      {"linear_kind", to_string(model.kind)},
      {"n_classes", model.n_classes},
      {"n_features", model.n_features},
      {"config", {{"l2", cfg.l2}, {"epochs", cfg.epochs}, {"lr", cfg.lr}, {"seed", cfg.seed}}},
      {"dtype", "f32le"},
      {"parameters",
       {{{"name", "weights"}, {"shape", {model.n_classes, model.n_features}}},
        {{"name", "bias"}, {"shape", {model.n_classes}}}}},
      {"n_values", model.weights.size() + model.bias.size()},
  };
  write_manifest(stem, j);

  std::vector<float> flat;
  flat.reserve(model.weights.size() + model.bias.size());
  for (double v : model.weights) flat.push_back(static_cast<float>(v));
  for (double v : model.bias) flat.push_back(static_cast<float>(v));
  write_f32_le(fs::path(stem.string() + ".bin"), flat);
}

LinearModel load_linear_checkpoint(const fs::path& stem) {
  const json j = read_manifest(stem);
  if (j.at("kind") != "linear") fail("bad_checkpoint", "not a linear checkpoint: " + stem.string());

  LinearModel model;
  const std::string kind = j.at("linear_kind").get<std::string>();
  model.kind = kind == "logistic" ? LinearKind::kLogistic : LinearKind::kHingeSvm;
  model.n_classes = j.at("n_classes").get<int>();
  model.n_features = j.at("n_features").get<int>();
  const auto flat = read_f32_le(fs::path(stem.string() + ".bin"), j.at("n_values").get<size_t>());
  const size_t n_w = static_cast<size_t>(model.n_classes) * model.n_features;
  model.weights.assign(flat.begin(), flat.begin() + static_cast<int64_t>(n_w));
  model.bias.assign(flat.begin() + static_cast<int64_t>(n_w), flat.end());
  return model;
}

void save_forest_checkpoint(const ForestModel& model, const fs::path& stem) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_class});
    }
    trees.push_back(std::move(nodes));
  }
  const json j = {
      {"format_version", kCheckpointFormatVersion},
      {"kind", "forest"},
      {"n_classes", model.n_classes},
      {"n_features", model.n_features},
      {"config",
       {{"n_trees", model.cfg.n_trees},
        {"max_depth", model.cfg.max_depth},
        {"min_leaf", model.cfg.min_leaf},
        {"features_per_split", model.cfg.features_per_split},
        {"bootstrap", model.cfg.bootstrap},
        {"seed", model.cfg.seed}}},
      {"trees", trees},
  };
  write_manifest(stem, j);
}

ForestModel load_forest_checkpoint(const fs::path& stem) {
  const json j = read_manifest(stem);
  if (j.at("kind") != "forest") fail("bad_checkpoint", "not a forest checkpoint: " + stem.string());

  ForestModel model;
  model.n_classes = j.at("n_classes").get<int>();
  model.n_features = j.at("n_features").get<int>();
  const auto& cfg = j.at("config");
  model.cfg.n_trees = cfg.at("n_trees").get<int>();
  model.cfg.max_depth = cfg.at("max_depth").get<int>();
  model.cfg.min_leaf = cfg.at("min_leaf").get<int>();
  model.cfg.features_per_split = cfg.at("features_per_split").get<int>();
  model.cfg.bootstrap = cfg.at("bootstrap").get<bool>();
  model.cfg.seed = cfg.at("seed").get<uint64_t>();
  for (const auto& tree_json : j.at("trees")) {
    DecisionTree tree;
    for (const auto& n : tree_json) {
      TreeNode node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.leaf_class = n.at(4).get<int>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace eegaffect
