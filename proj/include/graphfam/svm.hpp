#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "graphfam/forest.hpp"

namespace graphfam {

/// exp(-gamma * ||x - y||^2).
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

struct SvmOptions {
  double C = 1.0;
  double gamma = 0.0;  // <= 0 selects 1 / (F * var(X))
  double tol = 1e-3;
  int max_sweeps = 1000;
  std::uint64_t seed = 0;
};

/// One-vs-rest soft-margin SVM with an RBF kernel, fitted by sequential
/// minimal optimization.
struct SvmModel {
  struct BinaryClassifier {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;  // alpha_i * y_i per support vector
    double bias = 0.0;
  };
  int num_classes = 0;
  double gamma = 0.0;
  double C = 0.0;
  std::vector<BinaryClassifier> per_class;

  std::vector<double> decision_values(std::span<const double> x) const;
  /// argmax of the decision values; ties go to the lower class index.
  int predict(std::span<const double> x) const;
};

SvmModel fit_svm(const FeatureTable& X, const std::vector<int>& y,
                 const SvmOptions& opts);

void write_svm(std::ostream& out, const SvmModel& model);
SvmModel read_svm(std::istream& in);

}  // namespace graphfam
