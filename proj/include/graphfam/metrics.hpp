#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "graphfam/graph.hpp"

namespace graphfam {

/// 5x5 counts with rows = true family and cols = predicted, in the fixed
/// report order (ER, BA, WS, SBM, HK).
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumFamilies>, kNumFamilies> counts{};

  std::int64_t total() const;
  std::int64_t trace() const;
};

/// Builds the matrix from class-index label vectors (ER=0..SBM=4).
ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;  // class never predicted
  bool recall_degenerate = false;     // class absent from y_true
  bool f1_degenerate = false;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, kNumFamilies> per_class{};  // report order
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

MetricsReport metrics_from_confusion(const ConfusionMatrix& m);

/// Machine-readable key/value lines; stable field order, full precision.
void write_metrics(std::ostream& out, const MetricsReport& r);
MetricsReport read_metrics(std::istream& in);

/// Tab-delimited counts with a header row of predicted-class names.
void write_confusion(std::ostream& out, const ConfusionMatrix& m);

}  // namespace graphfam
