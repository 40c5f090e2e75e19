// eeg_affect: synth | featurize | train | eval | report
//
// Global flags: --config <json>, --seed <int>, --out <dir>. Failures print a
// machine-parsable "error_code=<code> ..." line; exit codes: 2 usage/config/
// missing input, 3 diverged training, 1 any other failure.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "eegaffect/commands.hpp"
#include "eegaffect/error.hpp"

namespace {

using eegaffect::RunConfig;

int exit_code_for(const std::string& code) {
  if (code == "usage" || code == "config_error" || code == "missing_checkpoint" ||
      code == "missing_features" || code == "bad_game_id") {
    return 2;
  }
  if (code == "diverged_loss") return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG emotion-recognition pipeline: windowed features, tri-format labels, "
               "sequence and classical classifiers"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs";
  int64_t seed_override = -1;
  app.add_option("--config", config_path, "JSON config file (strictly validated)");
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--out", out_dir, "output base directory")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "generate a synthetic GAMEEMO-format dataset");

  std::string data_dir, ratings_path;
  auto* featurize = app.add_subcommand("featurize", "extract windowed features and labels");
  featurize->add_option("--data", data_dir, "dataset root directory")->required();
  featurize->add_option("--ratings", ratings_path, "rating sidecar CSV")->required();

  std::string features_dir, task_name = "binary", model_name = "lstm_gru";
  auto* train = app.add_subcommand("train", "train one model on one task");
  train->add_option("--features", features_dir, "featurize output directory")->required();
  train->add_option("--task", task_name, "binary | categorical | multilabel")
      ->capture_default_str();
  train->add_option("--model", model_name,
                    "lstm | gru | lstm_gru | cnn_lstm | logistic | svm | forest")
      ->capture_default_str();

  std::string checkpoint_stem, split_name = "eval";
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a subject split");
  eval->add_option("--checkpoint", checkpoint_stem, "checkpoint stem (without .json)")->required();
  eval->add_option("--features", features_dir, "featurize output directory")->required();
  eval->add_option("--task", task_name, "binary | categorical | multilabel")
      ->capture_default_str();
  eval->add_option("--split", split_name, "train | eval | all")->capture_default_str();

  auto* report = app.add_subcommand("report",
                                    "train every model on every task and compare against "
                                    "published reference results");
  report->add_option("--data", data_dir, "dataset root directory")->required();
  report->add_option("--ratings", ratings_path, "rating sidecar CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "error_code=usage %s\n", e.what());
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? eegaffect::default_run_config()
                                        : eegaffect::load_run_config(config_path);
    if (seed_override >= 0) {
      nlohmann::json j = eegaffect::run_config_to_json(cfg);
      j["seed"] = static_cast<uint64_t>(seed_override);
      cfg = eegaffect::run_config_from_json(j);
    }

    if (*synth) {
      eegaffect::cmd_synth(cfg, out_dir);
    } else if (*featurize) {
      eegaffect::cmd_featurize(cfg, data_dir, ratings_path, out_dir);
    } else if (*train) {
      eegaffect::cmd_train(cfg, features_dir, eegaffect::task_from_string(task_name), model_name,
                           out_dir);
    } else if (*eval) {
      eegaffect::cmd_eval(cfg, checkpoint_stem, features_dir,
                          eegaffect::task_from_string(task_name),
                          eegaffect::split_side_from_string(split_name), out_dir);
    } else if (*report) {
      eegaffect::cmd_report(cfg, data_dir, ratings_path, out_dir);
    }
    return 0;
  } catch (const eegaffect::Error& e) {
    std::fprintf(stderr, "error_code=%s %s\n", e.code().c_str(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error_code=internal %s\n", e.what());
    return 1;
  }
}
