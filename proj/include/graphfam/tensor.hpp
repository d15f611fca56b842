#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace graphfam {

/// Dense row-major matrix of doubles.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::int64_t size() const { return static_cast<std::int64_t>(rows) * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  static Tensor full(int r, int c, double v);
  /// Glorot-uniform in +-sqrt(6/(fan_in+fan_out)).
  static Tensor glorot(int r, int c, std::mt19937_64& rng);
};

/// Trainable tensor with Adam moment buffers.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor m;
  Tensor v;
  long step = 0;

  Parameter() = default;
  Parameter(std::string n, Tensor t)
      : name(std::move(n)), value(std::move(t)), m(value.rows, value.cols), v(value.rows, value.cols) {}
};

/// Bias-corrected Adam update consuming the supplied gradient.
void adam_step(Parameter& p, const Tensor& grad, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

/// Halves the rate after `patience` consecutive validations without strict
/// improvement over the best seen; the bad-count resets on improvement or
/// reduction.
struct PlateauScheduler {
  double lr;
  double factor = 0.5;
  int patience = 5;
  double best = 0.0;
  int bad = 0;
  bool seen_any = false;

  explicit PlateauScheduler(double initial_lr) : lr(initial_lr) {}
  /// Returns true when this step reduced the rate.
  bool step(double val_loss);
};

enum class Mode { kTrain, kEval };

/// Running statistics of one batch-norm stage (learned gamma/beta live in
/// Parameters owned by the model).
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  explicit BatchNormState(int cols)
      : running_mean(1, cols), running_var(Tensor::full(1, cols, 1.0)) {}
};

/// Fixed sparse matrix in CSR form; never differentiated through.
struct SparseOp {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> col;
  std::vector<double> coeff;

  static SparseOp transpose_of(const SparseOp& s);
};

class Tape;

/// Handle to a tape node.
class Value {
 public:
  Value() = default;
  int rows() const;
  int cols() const;
  const Tensor& tensor() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Value(Tape* t, int idx) : tape_(t), idx_(idx) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

/// Reverse-mode tape over matrix primitives. Build the graph with the ops
/// below, call backward(loss) once, then read grad(...) for any node. The
/// tape is cleared and rebuilt for every optimization step.
class Tape {
 public:
  Value input(Tensor t);
  Value param(const Parameter& p) { return input(p.value); }

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value add_row_broadcast(Value a, Value bias);  // bias is 1 x C
  Value concat_cols(Value a, Value b);
  Value mul(Value a, Value b);  // elementwise
  Value scale(Value a, double c);
  Value relu(Value a);
  Value leaky_relu(Value a, double slope);
  Value row_softmax(Value a);
  /// y = s * x. s_t must be the transpose of s (used by the backward pass).
  Value spmm(const SparseOp& s, const SparseOp& s_t, Value x);
  /// y = (offset + e) * x with a learnable 1x1 scalar e.
  Value scale_by_scalar(Value x, Value e, double offset);
  Value batch_norm(Value x, Value gamma, Value beta, BatchNormState& state,
                   Mode mode, double momentum = 0.1, double eps = 1e-5);
  Value dropout(Value x, double rate, Mode mode, std::mt19937_64& rng);
  /// Segment means over rows; graph_of_node must be non-decreasing and every
  /// graph id in [0, num_graphs) must own at least one row.
  Value global_mean_pool(Value x, const std::vector<int>& graph_of_node, int num_graphs);
  /// Mean softmax cross-entropy; returns a 1x1 scalar.
  Value cross_entropy(Value logits, const std::vector<int>& labels);

  /// Extension point for fused ops: appends a node whose backward receives the
  /// output gradient, the parents' gradient buffers and values, and the stored
  /// output. Sparse operators referenced by ops must outlive the tape.
  using BackwardFn = std::function<void(const Tensor& grad_out, std::span<Tensor* const> parent_grads,
                                        std::span<const Tensor* const> parent_values, const Tensor& out)>;
  Value adopt(Tensor value, const std::vector<Value>& parents, BackwardFn backward);

  const Tensor& value_of(Value v) const;
  const Tensor& grad(Value v) const;

  /// Seeds the (1x1) root with 1 and propagates in reverse creation order.
  void backward(Value root);
  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    BackwardFn backward;
  };
  Value append(Tensor value, std::vector<int> parents, BackwardFn backward);
  std::vector<Node> nodes_;
};

}  // namespace graphfam
