#include "graphfam/svm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"

namespace graphfam {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
  if (gamma <= 0.0) throw std::invalid_argument("rbf_kernel: gamma must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

// Platt-style SMO on one binary problem over a precomputed kernel matrix.
struct SmoSolver {
  const std::vector<double>& K;  // n x n, row-major
  int n;
  const std::vector<double>& y;  // +1 / -1
  double C;
  double tol;
  std::vector<double> alpha;
  std::vector<double> error;  // f(i) - y_i
  double b = 0.0;
  std::mt19937_64 rng;

  SmoSolver(const std::vector<double>& kernel, int n_, const std::vector<double>& labels,
            double c, double tolerance, std::uint64_t seed)
      : K(kernel), n(n_), y(labels), C(c), tol(tolerance), alpha(n_, 0.0), error(n_), rng(seed) {
    for (int i = 0; i < n; ++i) error[i] = -y[i];
  }

  double k(int i, int j) const { return K[static_cast<std::size_t>(i) * n + j]; }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    double a1 = alpha[i1], a2 = alpha[i2];
    double y1 = y[i1], y2 = y[i2];
    double e1 = error[i1], e2 = error[i2];
    double s = y1 * y2;
    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (lo >= hi) return false;
    double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
    double eta = k11 + k22 - 2.0 * k12;
    double a2_new;
    if (eta > 0.0) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // Degenerate curvature: evaluate the objective at both clip ends.
      double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
      double f2 = y2 * (e2 + b) - a2 * k22 - s * a1 * k12;
      double l1 = a1 + s * (a2 - lo);
      double h1 = a1 + s * (a2 - hi);
      double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - 1e-12) {
        a2_new = lo;
      } else if (obj_lo > obj_hi + 1e-12) {
        a2_new = hi;
      } else {
        return false;
      }
    }
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    double a1_new = a1 + s * (a2 - a2_new);

    double b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + b;
    double b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + b;
    double b_new;
    if (a1_new > 0.0 && a1_new < C) {
      b_new = b1;
    } else if (a2_new > 0.0 && a2_new < C) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    double db = b_new - b;
    for (int i = 0; i < n; ++i) {
      error[i] += y1 * (a1_new - a1) * k(i1, i) + y2 * (a2_new - a2) * k(i2, i) - db;
    }
    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
    b = b_new;
    error[i1] = decision(i1) - y1;
    error[i2] = decision(i2) - y2;
    return true;
  }

  double decision(int i) const {
    double f = -b;
    for (int j = 0; j < n; ++j) {
      if (alpha[j] > 0.0) f += alpha[j] * y[j] * k(j, i);
    }
    return f;
  }

  bool examine(int i2) {
    double y2 = y[i2], a2 = alpha[i2], e2 = error[i2];
    double r2 = e2 * y2;
    if (!((r2 < -tol && a2 < C) || (r2 > tol && a2 > 0.0))) return false;
    // First-order heuristic: widest error gap among non-bound points.
    int best = -1;
    double best_gap = 0.0;
    for (int j = 0; j < n; ++j) {
      if (alpha[j] > 0.0 && alpha[j] < C) {
        double gap = std::abs(e2 - error[j]);
        if (gap > best_gap) {
          best_gap = gap;
          best = j;
        }
      }
    }
    if (best >= 0 && take_step(best, i2)) return true;
    int start = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    for (int off = 0; off < n; ++off) {
      int j = (start + off) % n;
      if (alpha[j] > 0.0 && alpha[j] < C && take_step(j, i2)) return true;
    }
    start = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    for (int off = 0; off < n; ++off) {
      int j = (start + off) % n;
      if (take_step(j, i2)) return true;
    }
    return false;
  }

  void solve(int max_sweeps) {
    bool examine_all = true;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      int changed = 0;
      if (examine_all) {
        for (int i = 0; i < n; ++i) changed += examine(i) ? 1 : 0;
      } else {
        for (int i = 0; i < n; ++i) {
          if (alpha[i] > 0.0 && alpha[i] < C) changed += examine(i) ? 1 : 0;
        }
      }
      if (examine_all) {
        if (changed == 0) break;  // a silent full pass means KKT holds everywhere
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }
};

}  // namespace

std::vector<double> SvmModel::decision_values(std::span<const double> x) const {
  std::vector<double> values(num_classes, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const BinaryClassifier& bc = per_class[c];
    double f = -bc.bias;
    for (std::size_t s = 0; s < bc.support_vectors.size(); ++s) {
      f += bc.coef[s] * rbf_kernel(bc.support_vectors[s], x, gamma);
    }
    values[c] = f;
  }
  return values;
}

int SvmModel::predict(std::span<const double> x) const {
  auto values = decision_values(x);
  int best = 0;
  for (int c = 1; c < num_classes; ++c) {
    if (values[c] > values[best]) best = c;
  }
  return best;
}

SvmModel fit_svm(const FeatureTable& X, const std::vector<int>& y,
                 const SvmOptions& opts) {
  const int n = X.size();
  if (n == 0) throw std::invalid_argument("fit_svm: empty input");
  std::set<int> classes(y.begin(), y.end());
  if (classes.size() < 2) throw std::invalid_argument("fit_svm: need at least two classes");
  const int num_classes = *classes.rbegin() + 1;
  const int dim = X.cols();

  SvmModel model;
  model.num_classes = num_classes;
  model.C = opts.C;
  if (opts.gamma > 0.0) {
    model.gamma = opts.gamma;
  } else {
    double mean = 0.0, sq = 0.0;
    for (const auto& row : X.rows) {
      for (double v : row) {
        mean += v;
        sq += v * v;
      }
    }
    double count = static_cast<double>(n) * dim;
    mean /= count;
    double var = sq / count - mean * mean;
    model.gamma = var > 1e-12 ? 1.0 / (dim * var) : 1.0 / dim;
  }

  std::vector<double> kernel(static_cast<std::size_t>(n) * n);
  parallel_for(n, 8, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      for (int j = 0; j < n; ++j) {
        kernel[static_cast<std::size_t>(i) * n + j] =
            rbf_kernel(X.rows[static_cast<std::size_t>(i)], X.rows[j], model.gamma);
      }
    }
  });

  model.per_class.resize(num_classes);
  parallel_for(num_classes, 1, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t c = begin; c < end; ++c) {
      std::vector<double> labels(n);
      for (int i = 0; i < n; ++i) labels[i] = y[i] == c ? 1.0 : -1.0;
      SmoSolver solver(kernel, n, labels, opts.C, opts.tol,
                       derive_seed(opts.seed, static_cast<std::uint64_t>(c)));
      solver.solve(opts.max_sweeps);
      auto& bc = model.per_class[static_cast<std::size_t>(c)];
      bc.bias = solver.b;
      for (int i = 0; i < n; ++i) {
        if (solver.alpha[i] > 1e-12) {
          bc.support_vectors.push_back(X.rows[i]);
          bc.coef.push_back(solver.alpha[i] * labels[i]);
        }
      }
    }
  });
  return model;
}

void write_svm(std::ostream& out, const SvmModel& model) {
  auto old = out.precision(17);
  int dim = 0;
  for (const auto& bc : model.per_class) {
    if (!bc.support_vectors.empty()) dim = static_cast<int>(bc.support_vectors[0].size());
  }
  out << "svm " << model.num_classes << ' ' << dim << ' ' << model.gamma << ' '
      << model.C << '\n';
  for (int c = 0; c < model.num_classes; ++c) {
    const auto& bc = model.per_class[c];
    out << "class " << c << ' ' << bc.bias << ' ' << bc.support_vectors.size() << '\n';
    for (std::size_t s = 0; s < bc.support_vectors.size(); ++s) {
      out << bc.coef[s];
      for (double v : bc.support_vectors[s]) out << ' ' << v;
      out << '\n';
    }
  }
  out.precision(old);
}

SvmModel read_svm(std::istream& in) {
  SvmModel model;
  std::string tag;
  int dim = 0;
  if (!(in >> tag >> model.num_classes >> dim >> model.gamma >> model.C) || tag != "svm")
    throw std::runtime_error("bad svm model header");
  model.per_class.resize(model.num_classes);
  for (int c = 0; c < model.num_classes; ++c) {
    int cls = 0;
    std::size_t nsv = 0;
    auto& bc = model.per_class[c];
    if (!(in >> tag >> cls >> bc.bias >> nsv) || tag != "class")
      throw std::runtime_error("bad svm class record");
    bc.support_vectors.assign(nsv, std::vector<double>(dim));
    bc.coef.assign(nsv, 0.0);
    for (std::size_t s = 0; s < nsv; ++s) {
      in >> bc.coef[s];
      for (int d = 0; d < dim; ++d) in >> bc.support_vectors[s][d];
    }
    if (!in) throw std::runtime_error("truncated svm model");
  }
  return model;
}

}  // namespace graphfam
