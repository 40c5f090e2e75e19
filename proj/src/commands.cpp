#include "eegaffect/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "eegaffect/checkpoint.hpp"
#include "eegaffect/error.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_deep_model(const std::string& model_name) {
  return model_name == "lstm" || model_name == "gru" || model_name == "lstm_gru" ||
         model_name == "cnn_lstm";
}

namespace {

void check_model_name(const std::string& name) {
  const auto& names = known_models();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    fail("usage", "unknown model '" + name + "' (expected one of " + all + ")");
  }
}

// <out_base>/<command>-<run_id>/ + resolved_config.json
fs::path make_run_dir(const RunConfig& cfg, const std::string& command, const json& args,
                      const fs::path& out_base) {
  json resolved = run_config_to_json(cfg);
  resolved["command"] = command;
  resolved["args"] = args;
  const fs::path dir = out_base / (command + "-" + run_id(resolved));
  fs::create_directories(dir);
  std::ofstream out(dir / "resolved_config.json");
  if (!out) fail("io_error", "cannot write resolved_config.json in " + dir.string());
  out << resolved.dump(2) << '\n';
  return dir;
}

int task_class_count(Task task) { return task == Task::kBinary ? 2 : 4; }

std::vector<int> flat_targets(const FlatDataset& data, Task task) {
  std::vector<int> y;
  y.reserve(data.labels.size());
  for (const auto& l : data.labels) {
    y.push_back(task == Task::kBinary ? l.binary_valence : static_cast<int>(l.categorical));
  }
  return y;
}

std::vector<int> group_targets(const FlatDataset& data, int group) {
  std::vector<int> y;
  y.reserve(data.labels.size());
  for (const auto& l : data.labels) y.push_back(l.ordinal_bins[static_cast<size_t>(group)]);
  return y;
}

LinearModelConfig linear_cfg_for(const RunConfig& cfg, const std::string& model_name) {
  LinearModelConfig lin = cfg.linear;
  lin.kind = model_name == "svm" ? LinearKind::kHingeSvm : LinearKind::kLogistic;
  return lin;
}

// ---- deep path -------------------------------------------------------------

template <typename T>
TrainOutcome deep_train(const RunConfig& cfg, const FeaturizedDataset& data, Task task,
                        const std::string& model_name, const fs::path& run_dir) {
  SequenceModelConfig model_cfg = cfg.sequence;
  model_cfg.architecture = architecture_from_string(model_name);
  model_cfg.head_dim = head_dim_for(task, data.n_bins);
  model_cfg.seed = cfg.seed;

  const SequenceDataset train = assemble_sequences(data, cfg.seq_len, SplitSide::kTrain);
  const SequenceDataset val = assemble_sequences(data, cfg.seq_len, SplitSide::kEval);
  if (train.empty()) fail("empty_dataset", "no training sequences (seq_len too long?)");

  SequenceModel<T> model(model_cfg);
  std::vector<EpochLog> logs = fit(model, train, val, cfg.train, task, data.n_bins);

  TrainOutcome out;
  out.run_dir = run_dir;
  out.checkpoint_stem = run_dir / "checkpoint";
  out.logs = std::move(logs);
  save_model_checkpoint(model, out.checkpoint_stem);
  write_epoch_logs_csv(run_dir / "curves.csv", out.logs);
  return out;
}

template <typename T>
SequenceEval deep_eval(const RunConfig& cfg, const FeaturizedDataset& data, Task task,
                       const LoadedSequenceCheckpoint& ckpt, SplitSide side) {
  SequenceModel<T> model(ckpt.config);
  model.import_f32(ckpt.flat_params);
  const SequenceDataset rows = assemble_sequences(data, cfg.seq_len, side);
  if (rows.empty()) fail("empty_dataset", "selected split holds no sequences");
  return evaluate_sequence_model(model, rows, cfg.train, task, data.n_bins);
}

// ---- classical path --------------------------------------------------------

void save_multigroup_manifest(const fs::path& stem, const std::string& model_name, int n_bins) {
  json groups = json::array();
  for (const char* emotion : kEmotionNames) {
    groups.push_back(stem.filename().string() + "_" + emotion);
  }
  const json j = {
      {"format_version", kCheckpointFormatVersion},
      {"kind", "multigroup"},
      {"model", model_name},
      {"n_bins", n_bins},
      {"groups", groups},
  };
  std::ofstream out(fs::path(stem.string() + ".json"));
  if (!out) fail("io_error", "cannot write " + stem.string() + ".json");
  out << j.dump(2) << '\n';
}

TrainOutcome classical_train(const RunConfig& cfg, const FeaturizedDataset& data, Task task,
                             const std::string& model_name, const fs::path& run_dir) {
  const FlatDataset train = flat_windows(data, SplitSide::kTrain);
  if (train.x.empty()) fail("empty_dataset", "no training windows");

  TrainOutcome out;
  out.run_dir = run_dir;
  out.checkpoint_stem = run_dir / "checkpoint";

  if (task == Task::kMultilabel) {
    // one classifier per emotion group, bundled behind a master manifest
    for (int g = 0; g < 4; ++g) {
      const fs::path stem = run_dir / (std::string("checkpoint_") + kEmotionNames[g]);
      const auto y = group_targets(train, g);
      if (model_name == "forest") {
        save_forest_checkpoint(rf_train(train.x, y, data.n_bins, cfg.forest), stem);
      } else {
        const auto lin_cfg = linear_cfg_for(cfg, model_name);
        save_linear_checkpoint(linear_train(train.x, y, data.n_bins, lin_cfg), lin_cfg, stem);
      }
    }
    save_multigroup_manifest(out.checkpoint_stem, model_name, data.n_bins);
    return out;
  }

  const int k = task_class_count(task);
  const auto y = flat_targets(train, task);
  if (model_name == "forest") {
    save_forest_checkpoint(rf_train(train.x, y, k, cfg.forest), out.checkpoint_stem);
  } else {
    const auto lin_cfg = linear_cfg_for(cfg, model_name);
    std::vector<double> losses;
    const LinearModel model = linear_train(train.x, y, k, lin_cfg, &losses);
    save_linear_checkpoint(model, lin_cfg, out.checkpoint_stem);
    for (size_t e = 0; e < losses.size(); ++e) {
      EpochLog log;
      log.epoch = static_cast<int>(e);
      log.lr = lin_cfg.lr;
      log.train_loss = losses[e];
      out.logs.push_back(log);
    }
    write_epoch_logs_csv(run_dir / "curves.csv", out.logs);
  }
  return out;
}

SequenceEval classical_eval(const FeaturizedDataset& data, Task task,
                            const fs::path& stem, SplitSide side) {
  const FlatDataset rows = flat_windows(data, side);
  if (rows.x.empty()) fail("empty_dataset", "selected split holds no windows");

  const std::string kind = checkpoint_kind(stem);
  SequenceEval out;

  if (kind == "multigroup") {
    if (task != Task::kMultilabel) {
      fail("head_mismatch", "multigroup checkpoint only fits the multilabel task");
    }
    std::ifstream in(fs::path(stem.string() + ".json"));
    json manifest = json::parse(in);
    if (manifest.at("n_bins").get<int>() != data.n_bins) {
      fail("head_mismatch", "checkpoint n_bins does not match the featurized dataset");
    }
    const std::string model_name = manifest.at("model").get<std::string>();

    std::vector<std::array<int, 4>> truth(rows.x.size()), pred(rows.x.size());
    for (size_t i = 0; i < rows.x.size(); ++i) truth[i] = rows.labels[i].ordinal_bins;
    for (int g = 0; g < 4; ++g) {
      const fs::path gstem = stem.parent_path() / manifest.at("groups").at(g).get<std::string>();
      if (model_name == "forest") {
        const ForestModel forest = load_forest_checkpoint(gstem);
        for (size_t i = 0; i < rows.x.size(); ++i) {
          pred[i][static_cast<size_t>(g)] = rf_predict(forest, rows.x[i].data()).label;
        }
      } else {
        const LinearModel lin = load_linear_checkpoint(gstem);
        for (size_t i = 0; i < rows.x.size(); ++i) {
          pred[i][static_cast<size_t>(g)] = lin.predict(rows.x[i].data());
        }
      }
    }
    MultilabelReport ml = multilabel_metrics(truth, pred, data.n_bins);
    out.report = ml.combined;
    out.group_cms = ml.group_cms;
    out.confusion = ml.group_cms[0];
    for (int g = 1; g < 4; ++g) out.confusion += ml.group_cms[static_cast<size_t>(g)];
    out.report.task = to_string(task);
    return out;
  }

  if (task == Task::kMultilabel) {
    fail("head_mismatch", "checkpoint kind '" + kind + "' cannot serve the multilabel task");
  }
  const int k = task_class_count(task);
  std::vector<int> pred;
  pred.reserve(rows.x.size());
  if (kind == "forest") {
    const ForestModel forest = load_forest_checkpoint(stem);
    if (forest.n_classes != k) {
      fail("head_mismatch", "forest has " + std::to_string(forest.n_classes) +
                                " classes, task needs " + std::to_string(k));
    }
    for (const auto& x : rows.x) pred.push_back(rf_predict(forest, x.data()).label);
  } else if (kind == "linear") {
    const LinearModel lin = load_linear_checkpoint(stem);
    if (lin.n_classes != k) {
      fail("head_mismatch", "linear model has " + std::to_string(lin.n_classes) +
                                " classes, task needs " + std::to_string(k));
    }
    for (const auto& x : rows.x) pred.push_back(lin.predict(x.data()));
  } else {
    fail("bad_checkpoint", "unsupported checkpoint kind: " + kind);
  }

  const auto truth = flat_targets(rows, task);
  out.confusion = confusion(truth, pred, k);
  out.report = metrics(out.confusion);
  out.report.task = to_string(task);
  return out;
}

void print_report_line(const MetricReport& r) {
  std::printf("  %-12s %-9s acc=%.4f  prec=%.4f  rec=%.4f  f1=%.4f", r.task.c_str(),
              r.model.c_str(), r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1);
  if (r.exact_match.has_value()) std::printf("  exact=%.4f", *r.exact_match);
  std::printf("\n");
}

struct ReferenceRow {
  const char* task;
  const char* model;
  double acc, prec, f1;
};

// Published GAMEEMO study results for the overlapping (task, model) pairs.
constexpr ReferenceRow kReference[] = {
    {"binary", "forest", 0.85, 0.85, 0.85},
    {"binary", "lstm_gru", 0.933, 0.933, 0.932},
    {"categorical", "forest", 0.796, 0.843, 0.758},
    {"categorical", "lstm_gru", 0.945, 0.938, 0.936},
    {"multilabel", "forest", 0.79, 0.79, 0.79},
    {"multilabel", "lstm_gru", 0.906, 0.909, 0.909},
};

const ReferenceRow* reference_for(const std::string& task, const std::string& model) {
  for (const auto& row : kReference) {
    if (task == row.task && model == row.model) return &row;
  }
  return nullptr;
}

}  // namespace

CommandResult cmd_synth(const RunConfig& cfg, const fs::path& out_base) {
  const fs::path run_dir = make_run_dir(cfg, "synth", json::object(), out_base);
  const auto sessions = generate_synthetic(cfg.synth);
  write_synthetic_dataset(sessions, cfg.synth, run_dir / "data");
  std::printf("synth: wrote %zu sessions to %s\n", sessions.size(),
              (run_dir / "data").string().c_str());
  return CommandResult{run_dir};
}

CommandResult cmd_featurize(const RunConfig& cfg, const fs::path& data_dir,
                            const fs::path& rating_sidecar, const fs::path& out_base) {
  const json args = {{"data", data_dir.string()}, {"ratings", rating_sidecar.string()}};
  const fs::path run_dir = make_run_dir(cfg, "featurize", args, out_base);

  const auto sessions = load_dataset(data_dir, rating_sidecar, cfg.sampling_rate_hz);
  if (sessions.empty()) fail("no_sessions", "no sessions found under " + data_dir.string());
  const FeaturizedDataset data =
      featurize_sessions(sessions, cfg.segmentation, cfg.binning, cfg.split_ratio, cfg.seed);
  write_featurized(data, run_dir);
  std::printf("featurize: %zu sessions -> %zu windows (train subjects %zu, eval subjects %zu)\n",
              sessions.size(), data.rows.size(), data.split.train_subjects.size(),
              data.split.eval_subjects.size());
  return CommandResult{run_dir};
}

TrainOutcome cmd_train(const RunConfig& cfg, const fs::path& features_dir, Task task,
                       const std::string& model_name, const fs::path& out_base) {
  check_model_name(model_name);
  const json args = {{"features", features_dir.string()},
                     {"task", to_string(task)},
                     {"model", model_name}};
  const fs::path run_dir = make_run_dir(cfg, "train", args, out_base);

  const FeaturizedDataset data = load_featurized(features_dir);
  TrainOutcome out;
  if (is_deep_model(model_name)) {
    out = cfg.precision == "f64" ? deep_train<double>(cfg, data, task, model_name, run_dir)
                                 : deep_train<float>(cfg, data, task, model_name, run_dir);
  } else {
    out = classical_train(cfg, data, task, model_name, run_dir);
  }
  if (!out.logs.empty()) {
    const auto& last = out.logs.back();
    std::printf("train: %s/%s done, final train_loss=%.6f val_acc=%.4f\n", to_string(task),
                model_name.c_str(), last.train_loss, last.accuracy);
  } else {
    std::printf("train: %s/%s done\n", to_string(task), model_name.c_str());
  }
  return out;
}

EvalOutcome cmd_eval(const RunConfig& cfg, const fs::path& checkpoint_stem,
                     const fs::path& features_dir, Task task, SplitSide side,
                     const fs::path& out_base) {
  const json args = {{"checkpoint", checkpoint_stem.string()},
                     {"features", features_dir.string()},
                     {"task", to_string(task)},
                     {"split", to_string(side)}};
  const fs::path run_dir = make_run_dir(cfg, "eval", args, out_base);

  const FeaturizedDataset data = load_featurized(features_dir);
  const std::string kind = checkpoint_kind(checkpoint_stem);

  SequenceEval ev;
  std::string model_name;
  if (kind == "sequence") {
    const LoadedSequenceCheckpoint ckpt = load_sequence_checkpoint(checkpoint_stem);
    if (ckpt.config.head_dim != head_dim_for(task, data.n_bins)) {
      fail("head_mismatch", "checkpoint head_dim " + std::to_string(ckpt.config.head_dim) +
                                " does not fit task " + to_string(task) + " (needs " +
                                std::to_string(head_dim_for(task, data.n_bins)) + ")");
    }
    model_name = to_string(ckpt.config.architecture);
    ev = cfg.precision == "f64" ? deep_eval<double>(cfg, data, task, ckpt, side)
                                : deep_eval<float>(cfg, data, task, ckpt, side);
  } else {
    model_name = kind == "forest" ? "forest" : kind;
    if (kind == "multigroup") {
      std::ifstream in(fs::path(checkpoint_stem.string() + ".json"));
      model_name = json::parse(in).at("model").get<std::string>();
    } else if (kind == "linear") {
      model_name =
          load_linear_checkpoint(checkpoint_stem).kind == LinearKind::kLogistic ? "logistic" : "svm";
    }
    ev = classical_eval(data, task, checkpoint_stem, side);
  }
  ev.report.model = model_name;

  EvalArtifact artifact;
  artifact.report = ev.report;
  artifact.confusion = ev.confusion;
  export_report({artifact}, run_dir);
  std::printf("eval (%s split):\n", to_string(side));
  print_report_line(ev.report);
  return EvalOutcome{run_dir, ev.report};
}

CommandResult cmd_report(const RunConfig& cfg, const fs::path& data_dir,
                         const fs::path& rating_sidecar, const fs::path& out_base) {
  const json args = {{"data", data_dir.string()}, {"ratings", rating_sidecar.string()}};
  const fs::path run_dir = make_run_dir(cfg, "report", args, out_base);

  const auto sessions = load_dataset(data_dir, rating_sidecar, cfg.sampling_rate_hz);
  if (sessions.empty()) fail("no_sessions", "no sessions found under " + data_dir.string());
  const FeaturizedDataset data =
      featurize_sessions(sessions, cfg.segmentation, cfg.binning, cfg.split_ratio, cfg.seed);

  const Task tasks[] = {Task::kBinary, Task::kCategorical, Task::kMultilabel};
  std::vector<EvalArtifact> artifacts;
  std::ofstream comparison(run_dir / "comparison.csv");
  if (!comparison) fail("io_error", "cannot write comparison.csv");
  comparison << "task,model,accuracy,precision,recall,f1,exact_match,"
                "reference_accuracy,reference_precision,reference_f1\n";

  for (Task task : tasks) {
    for (const std::string& model_name : known_models()) {
      const fs::path model_dir = run_dir / (std::string(to_string(task)) + "_" + model_name);
      fs::create_directories(model_dir);

      TrainOutcome trained;
      if (is_deep_model(model_name)) {
        trained = cfg.precision == "f64"
                      ? deep_train<double>(cfg, data, task, model_name, model_dir)
                      : deep_train<float>(cfg, data, task, model_name, model_dir);
      } else {
        trained = classical_train(cfg, data, task, model_name, model_dir);
      }

      SequenceEval ev;
      if (is_deep_model(model_name)) {
        const LoadedSequenceCheckpoint ckpt = load_sequence_checkpoint(trained.checkpoint_stem);
        ev = cfg.precision == "f64" ? deep_eval<double>(cfg, data, task, ckpt, SplitSide::kEval)
                                    : deep_eval<float>(cfg, data, task, ckpt, SplitSide::kEval);
      } else {
        ev = classical_eval(data, task, trained.checkpoint_stem, SplitSide::kEval);
      }
      ev.report.model = model_name;
      print_report_line(ev.report);

      EvalArtifact artifact;
      artifact.report = ev.report;
      artifact.confusion = ev.confusion;
      artifact.curves = trained.logs;
      artifacts.push_back(artifact);

      const ReferenceRow* ref = reference_for(to_string(task), model_name);
      comparison << to_string(task) << ',' << model_name << ',' << format_g9(ev.report.accuracy)
                 << ',' << format_g9(ev.report.macro_precision) << ','
                 << format_g9(ev.report.macro_recall) << ',' << format_g9(ev.report.macro_f1)
                 << ',' << (ev.report.exact_match ? format_g9(*ev.report.exact_match) : "")
                 << ',';
      if (ref) {
        comparison << format_g9(ref->acc) << ',' << format_g9(ref->prec) << ','
                   << format_g9(ref->f1);
      } else {
        comparison << ",,";
      }
      comparison << '\n';
    }
  }
  export_report(artifacts, run_dir / "exports");

  std::ofstream notes(run_dir / "report.txt");
  notes << "Comparison against published GAMEEMO reference results (see comparison.csv).\n"
        << "Reference rows exist for the random forest and LSTM-GRU models.\n\n"
        << "Reference (binary valence): lstm_gru acc 0.933 / f1 0.932, forest acc 0.85.\n"
        << "Reference (per-emotion macro): lstm_gru acc 0.945, forest acc 0.796.\n"
        << "Reference (multilabel): lstm_gru acc 0.906, forest acc 0.79.\n\n"
        << "Gaps against the reference are expected: the published study does not\n"
        << "specify how windows are assembled into model input sequences nor the\n"
        << "recurrent layer dimensions, so this implementation pins its own\n"
        << "defaults (seq_len, hidden sizes) in the resolved config.\n";

  std::printf("report: wrote %s\n", (run_dir / "comparison.csv").string().c_str());
  std::printf(
      "note: reference values come from the published GAMEEMO study; the unspecified\n"
      "sequence assembly and layer dimensions there make exact reproduction impossible.\n");
  return CommandResult{run_dir};
}

}  // namespace eegaffect
