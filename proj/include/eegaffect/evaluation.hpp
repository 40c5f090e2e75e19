#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eegaffect {

// Rows are true classes, columns are predictions.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<int64_t> counts;  // row-major [true][pred]

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int k) : n_classes(k), counts(static_cast<size_t>(k) * k, 0) {}

  int64_t& at(int t, int p) { return counts[static_cast<size_t>(t) * n_classes + p]; }
  int64_t at(int t, int p) const { return counts[static_cast<size_t>(t) * n_classes + p]; }
  int64_t total() const;
  int64_t row_sum(int t) const;
  int64_t col_sum(int p) const;
  int64_t trace() const;

  // elementwise sum; shapes must agree
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ovr_accuracy = 0.0;  // one-vs-rest accuracy, (TP + TN) / total
  int64_t support = 0;
};

struct MetricReport {
  std::string task;
  std::string model;
  int n_classes = 0;
  int64_t total = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  // macro averages skip zero-support classes
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  // micro averages; equal to accuracy for single-label tasks
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  // multilabel only: fraction of samples with all four groups correct
  std::optional<double> exact_match;
};

// Throws Error("label_out_of_range") when a label falls outside [0, K).
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred, int n_classes);

// Zero denominators yield 0, never NaN. Throws Error("empty_matrix") when the
// matrix holds no samples.
MetricReport metrics(const ConfusionMatrix& cm);

struct MultilabelReport {
  MetricReport combined;                      // group-mean metrics + exact match
  std::array<ConfusionMatrix, 4> group_cms;   // one K=B matrix per emotion
};

// Each of the four emotion groups is scored as a K=n_bins single-label task;
// the headline numbers are the unweighted mean over groups.
MultilabelReport multilabel_metrics(const std::vector<std::array<int, 4>>& true_bins,
                                    const std::vector<std::array<int, 4>>& pred_bins, int n_bins);

// Per-epoch training record; the confusion matrix snapshots the validation
// predictions at that epoch.
struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  ConfusionMatrix confusion;
};

// One evaluated (task, model) pair ready for export.
struct EvalArtifact {
  MetricReport report;
  ConfusionMatrix confusion;
  std::vector<EpochLog> curves;  // may be empty (forest has no epochs)
};

// Writes metrics_<task>_<model>.json, confusion_<task>_<model>.csv and, when
// curves exist, curves_<task>_<model>.csv. Deterministic bytes; silently
// overwrites previous exports of the same pair.
void export_report(const std::vector<EvalArtifact>& artifacts, const std::filesystem::path& out_dir);

std::string epoch_log_csv_header();
std::string epoch_log_csv_row(const EpochLog& log);
void write_epoch_logs_csv(const std::filesystem::path& path, const std::vector<EpochLog>& logs);

}  // namespace eegaffect
