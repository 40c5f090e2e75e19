#include "eegaffect/evaluation.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eegaffect/error.hpp"
#include "eegaffect/util.hpp"

namespace eegaffect {

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (int64_t c : counts) n += c;
  return n;
}

int64_t ConfusionMatrix::row_sum(int t) const {
  int64_t n = 0;
  for (int p = 0; p < n_classes; ++p) n += at(t, p);
  return n;
}

int64_t ConfusionMatrix::col_sum(int p) const {
  int64_t n = 0;
  for (int t = 0; t < n_classes; ++t) n += at(t, p);
  return n;
}

int64_t ConfusionMatrix::trace() const {
  int64_t n = 0;
  for (int k = 0; k < n_classes; ++k) n += at(k, k);
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (n_classes != other.n_classes) fail("shape_mismatch", "confusion matrix sizes differ");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          int n_classes) {
  if (truth.size() != pred.size()) {
    fail("shape_mismatch", "confusion needs equal-length label vectors, got " +
                               std::to_string(truth.size()) + " vs " + std::to_string(pred.size()));
  }
  if (n_classes < 1) fail("label_out_of_range", "n_classes must be >= 1");
  ConfusionMatrix cm(n_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = pred[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      fail("label_out_of_range", "label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                                     ") outside [0, " + std::to_string(n_classes) + ")");
    }
    ++cm.at(t, p);
  }
  return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
  const int64_t total = cm.total();
  if (total == 0) fail("empty_matrix", "cannot compute metrics of an empty confusion matrix");

  MetricReport r;
  r.n_classes = cm.n_classes;
  r.total = total;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

  int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  int supported = 0;
  for (int k = 0; k < cm.n_classes; ++k) {
    ClassMetrics m;
    const int64_t tp = cm.at(k, k);
    const int64_t col = cm.col_sum(k);
    const int64_t row = cm.row_sum(k);
    m.support = row;
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    const int64_t tn = total - row - col + tp;
    m.ovr_accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    r.per_class.push_back(m);

    tp_sum += tp;
    fp_sum += col - tp;
    fn_sum += row - tp;
    if (row > 0) {
      ++supported;
      r.macro_precision += m.precision;
      r.macro_recall += m.recall;
      r.macro_f1 += m.f1;
    }
  }
  if (supported > 0) {
    r.macro_precision /= supported;
    r.macro_recall /= supported;
    r.macro_f1 /= supported;
  }
  r.micro_precision = (tp_sum + fp_sum) > 0
                          ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum)
                          : 0.0;
  r.micro_recall = (tp_sum + fn_sum) > 0
                       ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum)
                       : 0.0;
  // integer-count form: for single-label tasks fp_sum == fn_sum == total -
  // trace, so this division is bit-identical to accuracy
  const int64_t micro_denom = 2 * tp_sum + fp_sum + fn_sum;
  r.micro_f1 = micro_denom > 0 ? static_cast<double>(2 * tp_sum) / static_cast<double>(micro_denom)
                               : 0.0;
  return r;
}

MultilabelReport multilabel_metrics(const std::vector<std::array<int, 4>>& true_bins,
                                    const std::vector<std::array<int, 4>>& pred_bins, int n_bins) {
  if (true_bins.size() != pred_bins.size()) {
    fail("shape_mismatch", "multilabel_metrics needs equal-length inputs");
  }
  MultilabelReport out;
  MetricReport& combined = out.combined;
  combined.n_classes = n_bins;
  combined.total = static_cast<int64_t>(true_bins.size());

  for (int g = 0; g < 4; ++g) {
    std::vector<int> t(true_bins.size()), p(true_bins.size());
    for (size_t i = 0; i < true_bins.size(); ++i) {
      t[i] = true_bins[i][static_cast<size_t>(g)];
      p[i] = pred_bins[i][static_cast<size_t>(g)];
    }
    out.group_cms[static_cast<size_t>(g)] = confusion(t, p, n_bins);
    const MetricReport group = metrics(out.group_cms[static_cast<size_t>(g)]);
    combined.accuracy += group.accuracy / 4.0;
    combined.macro_precision += group.macro_precision / 4.0;
    combined.macro_recall += group.macro_recall / 4.0;
    combined.macro_f1 += group.macro_f1 / 4.0;
    combined.micro_precision += group.micro_precision / 4.0;
    combined.micro_recall += group.micro_recall / 4.0;
    combined.micro_f1 += group.micro_f1 / 4.0;
  }

  int64_t exact = 0;
  for (size_t i = 0; i < true_bins.size(); ++i) {
    if (true_bins[i] == pred_bins[i]) ++exact;
  }
  combined.exact_match = true_bins.empty()
                             ? 0.0
                             : static_cast<double>(exact) / static_cast<double>(true_bins.size());
  return out;
}

namespace {

nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& m = r.per_class[k];
    per_class.push_back({
        {"class", k},
        {"precision", m.precision},
        {"recall", m.recall},
        {"f1", m.f1},
        {"ovr_accuracy", m.ovr_accuracy},
        {"support", m.support},
    });
  }
  nlohmann::json j = {
      {"task", r.task},
      {"model", r.model},
      {"n_classes", r.n_classes},
      {"total", r.total},
      {"accuracy", r.accuracy},
      {"per_class", per_class},
      {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
      {"micro", {{"precision", r.micro_precision}, {"recall", r.micro_recall}, {"f1", r.micro_f1}}},
  };
  if (r.exact_match.has_value()) j["exact_match"] = *r.exact_match;
  return j;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) fail("io_error", "cannot write " + path.string());
  for (int t = 0; t < cm.n_classes; ++t) {
    for (int p = 0; p < cm.n_classes; ++p) {
      out << cm.at(t, p) << (p + 1 < cm.n_classes ? ',' : '\n');
    }
  }
}

}  // namespace

std::string epoch_log_csv_header() { return "epoch,lr,train_loss,val_loss,acc,prec,rec,f1"; }

std::string epoch_log_csv_row(const EpochLog& log) {
  std::ostringstream row;
  row << log.epoch << ',' << format_g9(log.lr) << ',' << format_g9(log.train_loss) << ','
      << format_g9(log.val_loss) << ',' << format_g9(log.accuracy) << ','
      << format_g9(log.precision) << ',' << format_g9(log.recall) << ',' << format_g9(log.f1);
  return row.str();
}

void write_epoch_logs_csv(const std::filesystem::path& path, const std::vector<EpochLog>& logs) {
  std::ofstream out(path);
  if (!out) fail("io_error", "cannot write " + path.string());
  out << epoch_log_csv_header() << '\n';
  for (const auto& log : logs) out << epoch_log_csv_row(log) << '\n';
}

void export_report(const std::vector<EvalArtifact>& artifacts,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& art : artifacts) {
    const std::string stem = art.report.task + "_" + art.report.model;
    {
      std::ofstream out(out_dir / ("metrics_" + stem + ".json"));
      if (!out) fail("io_error", "cannot write metrics_" + stem + ".json");
      out << report_to_json(art.report).dump(2) << '\n';
    }
    write_confusion_csv(out_dir / ("confusion_" + stem + ".csv"), art.confusion);
    if (!art.curves.empty()) {
      write_epoch_logs_csv(out_dir / ("curves_" + stem + ".csv"), art.curves);
    }
  }
}

}  // namespace eegaffect
