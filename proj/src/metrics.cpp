#include "graphfam/metrics.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace graphfam {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < kNumFamilies; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= kNumFamilies || p < 0 || p >= kNumFamilies)
      throw std::invalid_argument("confusion: label out of range");
    ++m.counts[report_index(static_cast<Family>(t))][report_index(static_cast<Family>(p))];
  }
  return m;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total <= 0) throw std::invalid_argument("metrics: empty confusion matrix");
  MetricsReport r;
  r.accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);
  for (int c = 0; c < kNumFamilies; ++c) {
    std::int64_t col = 0, row = 0;
    for (int i = 0; i < kNumFamilies; ++i) {
      col += m.counts[i][c];
      row += m.counts[c][i];
    }
    ClassMetrics& cm = r.per_class[c];
    const double diag = static_cast<double>(m.counts[c][c]);
    if (col == 0) {
      cm.precision_degenerate = true;
    } else {
      cm.precision = diag / static_cast<double>(col);
    }
    if (row == 0) {
      cm.recall_degenerate = true;
    } else {
      cm.recall = diag / static_cast<double>(row);
    }
    if (cm.precision + cm.recall > 0.0) {
      cm.f1 = 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    } else {
      cm.f1_degenerate = true;
    }
    r.macro_precision += cm.precision / kNumFamilies;
    r.macro_recall += cm.recall / kNumFamilies;
    r.macro_f1 += cm.f1 / kNumFamilies;
  }
  return r;
}

void write_metrics(std::ostream& out, const MetricsReport& r) {
  auto old = out.precision(17);
  out << "accuracy = " << r.accuracy << '\n';
  for (int c = 0; c < kNumFamilies; ++c) {
    const char* name = family_name(kReportOrder[c]);
    const ClassMetrics& cm = r.per_class[c];
    out << "precision." << name << " = " << cm.precision
        << (cm.precision_degenerate ? " degenerate" : "") << '\n';
    out << "recall." << name << " = " << cm.recall
        << (cm.recall_degenerate ? " degenerate" : "") << '\n';
    out << "f1." << name << " = " << cm.f1 << (cm.f1_degenerate ? " degenerate" : "")
        << '\n';
  }
  out << "macro_precision = " << r.macro_precision << '\n';
  out << "macro_recall = " << r.macro_recall << '\n';
  out << "macro_f1 = " << r.macro_f1 << '\n';
  out.precision(old);
}

MetricsReport read_metrics(std::istream& in) {
  MetricsReport r;
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    double value = 0.0;
    if (ls >> key >> eq >> value && eq == "=") kv[key] = value;
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error("metrics file missing key: " + k);
    return it->second;
  };
  r.accuracy = get("accuracy");
  for (int c = 0; c < kNumFamilies; ++c) {
    const std::string name = family_name(kReportOrder[c]);
    r.per_class[c].precision = get("precision." + name);
    r.per_class[c].recall = get("recall." + name);
    r.per_class[c].f1 = get("f1." + name);
  }
  r.macro_precision = get("macro_precision");
  r.macro_recall = get("macro_recall");
  r.macro_f1 = get("macro_f1");
  return r;
}

void write_confusion(std::ostream& out, const ConfusionMatrix& m) {
  out << "true\\pred";
  for (int c = 0; c < kNumFamilies; ++c) out << '\t' << family_name(kReportOrder[c]);
  out << '\n';
  for (int r = 0; r < kNumFamilies; ++r) {
    out << family_name(kReportOrder[r]);
    for (int c = 0; c < kNumFamilies; ++c) out << '\t' << m.counts[r][c];
    out << '\n';
  }
}

}  // namespace graphfam
