#include "graphfam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphfam/parallel.hpp"

namespace graphfam {

Tensor Tensor::full(int r, int c, double v) {
  Tensor t(r, c);
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

Tensor Tensor::glorot(int r, int c, std::mt19937_64& rng) {
  Tensor t(r, c);
  double limit = std::sqrt(6.0 / (r + c));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& x : t.data) x = dist(rng);
  return t;
}

void adam_step(Parameter& p, const Tensor& grad, double lr, double beta1,
               double beta2, double eps) {
  if (!p.value.same_shape(grad)) throw std::invalid_argument("adam_step: gradient shape mismatch");
  p.step += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p.step));
  for (std::size_t i = 0; i < p.value.data.size(); ++i) {
    double g = grad.data[i];
    p.m.data[i] = beta1 * p.m.data[i] + (1.0 - beta1) * g;
    p.v.data[i] = beta2 * p.v.data[i] + (1.0 - beta2) * g * g;
    double mhat = p.m.data[i] / bc1;
    double vhat = p.v.data[i] / bc2;
    p.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

bool PlateauScheduler::step(double val_loss) {
  if (!seen_any || val_loss < best) {
    best = seen_any ? std::min(best, val_loss) : val_loss;
    seen_any = true;
    bad = 0;
    return false;
  }
  if (++bad >= patience) {
    lr *= factor;
    bad = 0;
    return true;
  }
  return false;
}

SparseOp SparseOp::transpose_of(const SparseOp& s) {
  SparseOp t;
  t.rows = s.cols;
  t.cols = s.rows;
  t.row_ptr.assign(t.rows + 1, 0);
  for (int c : s.col) ++t.row_ptr[c + 1];
  for (int r = 0; r < t.rows; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
  t.col.resize(s.col.size());
  t.coeff.resize(s.coeff.size());
  std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < s.rows; ++r) {
    for (std::int64_t i = s.row_ptr[r]; i < s.row_ptr[r + 1]; ++i) {
      std::int64_t pos = cursor[s.col[i]]++;
      t.col[pos] = r;
      t.coeff[pos] = s.coeff[i];
    }
  }
  return t;
}

int Value::rows() const { return tensor().rows; }
int Value::cols() const { return tensor().cols; }
const Tensor& Value::tensor() const { return tape_->value_of(*this); }

namespace {

constexpr std::int64_t kRowGrain = 16;

void matmul_into(const Tensor& a, const Tensor& b, Tensor& c) {
  parallel_for(a.rows, kRowGrain, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      double* ci = c.row(static_cast<int>(i));
      const double* ai = a.row(static_cast<int>(i));
      for (int k = 0; k < a.cols; ++k) {
        double av = ai[k];
        if (av == 0.0) continue;
        const double* bk = b.row(k);
        for (int j = 0; j < b.cols; ++j) ci[j] += av * bk[j];
      }
    }
  });
}

// dA += G * B^T
void accumulate_grad_a(const Tensor& g, const Tensor& b, Tensor& da) {
  parallel_for(da.rows, kRowGrain, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      double* dai = da.row(static_cast<int>(i));
      const double* gi = g.row(static_cast<int>(i));
      for (int k = 0; k < da.cols; ++k) {
        const double* bk = b.row(k);
        double acc = 0.0;
        for (int j = 0; j < b.cols; ++j) acc += gi[j] * bk[j];
        dai[k] += acc;
      }
    }
  });
}

// dB += A^T * G
void accumulate_grad_b(const Tensor& a, const Tensor& g, Tensor& db) {
  parallel_for(db.rows, kRowGrain, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t k = begin; k < end; ++k) {
      double* dbk = db.row(static_cast<int>(k));
      for (int i = 0; i < a.rows; ++i) {
        double av = a.at(i, static_cast<int>(k));
        if (av == 0.0) continue;
        const double* gi = g.row(i);
        for (int j = 0; j < g.cols; ++j) dbk[j] += av * gi[j];
      }
    }
  });
}

void spmm_into(const SparseOp& s, const Tensor& x, Tensor& y) {
  parallel_for(s.rows, 64, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t r = begin; r < end; ++r) {
      double* yr = y.row(static_cast<int>(r));
      for (std::int64_t i = s.row_ptr[r]; i < s.row_ptr[r + 1]; ++i) {
        double w = s.coeff[i];
        const double* xr = x.row(s.col[i]);
        for (int j = 0; j < x.cols; ++j) yr[j] += w * xr[j];
      }
    }
  });
}

}  // namespace

Value Tape::append(Tensor value, std::vector<int> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.grad = Tensor(node.value.rows, node.value.cols);
  node.parents = std::move(parents);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Value(this, static_cast<int>(nodes_.size()) - 1);
}

Value Tape::input(Tensor t) { return append(std::move(t), {}, nullptr); }

Value Tape::adopt(Tensor value, const std::vector<Value>& parents, BackwardFn backward) {
  std::vector<int> idx;
  idx.reserve(parents.size());
  for (const Value& p : parents) {
    if (p.tape_ != this) throw std::invalid_argument("adopt: value from another tape");
    idx.push_back(p.idx_);
  }
  return append(std::move(value), std::move(idx), std::move(backward));
}

const Tensor& Tape::value_of(Value v) const { return nodes_[v.idx_].value; }
const Tensor& Tape::grad(Value v) const { return nodes_[v.idx_].grad; }

void Tape::backward(Value root) {
  if (root.tape_ != this) throw std::invalid_argument("backward: foreign value");
  Node& r = nodes_[root.idx_];
  if (r.value.rows != 1 || r.value.cols != 1)
    throw std::invalid_argument("backward: root must be a 1x1 scalar");
  r.grad.at(0, 0) = 1.0;
  for (int idx = root.idx_; idx >= 0; --idx) {
    Node& node = nodes_[idx];
    if (!node.backward) continue;
    std::vector<Tensor*> pgrads;
    std::vector<const Tensor*> pvalues;
    pgrads.reserve(node.parents.size());
    pvalues.reserve(node.parents.size());
    for (int p : node.parents) {
      pgrads.push_back(&nodes_[p].grad);
      pvalues.push_back(&nodes_[p].value);
    }
    node.backward(node.grad, std::span<Tensor* const>(pgrads),
                  std::span<const Tensor* const>(pvalues), node.value);
  }
}

void Tape::clear() { nodes_.clear(); }

Value Tape::matmul(Value a, Value b) {
  const Tensor& ta = value_of(a);
  const Tensor& tb = value_of(b);
  if (ta.cols != tb.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Tensor out(ta.rows, tb.cols);
  matmul_into(ta, tb, out);
  return adopt(std::move(out), {a, b},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const> pv, const Tensor&) {
                 accumulate_grad_a(g, *pv[1], *pg[0]);
                 accumulate_grad_b(*pv[0], g, *pg[1]);
               });
}

Value Tape::add(Value a, Value b) {
  const Tensor& ta = value_of(a);
  const Tensor& tb = value_of(b);
  if (!ta.same_shape(tb)) throw std::invalid_argument("add: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  return adopt(std::move(out), {a, b},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const>, const Tensor&) {
                 for (std::size_t i = 0; i < g.data.size(); ++i) {
                   pg[0]->data[i] += g.data[i];
                   pg[1]->data[i] += g.data[i];
                 }
               });
}

Value Tape::add_row_broadcast(Value a, Value bias) {
  const Tensor& ta = value_of(a);
  const Tensor& tb = value_of(bias);
  if (tb.rows != 1 || tb.cols != ta.cols)
    throw std::invalid_argument("add_row_broadcast: bias must be 1 x cols");
  Tensor out = ta;
  for (int r = 0; r < out.rows; ++r) {
    double* orow = out.row(r);
    for (int c = 0; c < out.cols; ++c) orow[c] += tb.data[c];
  }
  return adopt(std::move(out), {a, bias},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const>, const Tensor&) {
                 for (std::size_t i = 0; i < g.data.size(); ++i) pg[0]->data[i] += g.data[i];
                 for (int r = 0; r < g.rows; ++r) {
                   const double* grow = g.row(r);
                   for (int c = 0; c < g.cols; ++c) pg[1]->data[c] += grow[c];
                 }
               });
}

Value Tape::concat_cols(Value a, Value b) {
  const Tensor& ta = value_of(a);
  const Tensor& tb = value_of(b);
  if (ta.rows != tb.rows) throw std::invalid_argument("concat_cols: row counts differ");
  Tensor out(ta.rows, ta.cols + tb.cols);
  for (int r = 0; r < ta.rows; ++r) {
    std::copy(ta.row(r), ta.row(r) + ta.cols, out.row(r));
    std::copy(tb.row(r), tb.row(r) + tb.cols, out.row(r) + ta.cols);
  }
  const int ca = ta.cols;
  return adopt(std::move(out), {a, b},
               [ca](const Tensor& g, std::span<Tensor* const> pg,
                    std::span<const Tensor* const>, const Tensor&) {
                 for (int r = 0; r < g.rows; ++r) {
                   const double* grow = g.row(r);
                   double* ga = pg[0]->row(r);
                   double* gb = pg[1]->row(r);
                   for (int c = 0; c < ca; ++c) ga[c] += grow[c];
                   for (int c = ca; c < g.cols; ++c) gb[c - ca] += grow[c];
                 }
               });
}

Value Tape::mul(Value a, Value b) {
  const Tensor& ta = value_of(a);
  const Tensor& tb = value_of(b);
  if (!ta.same_shape(tb)) throw std::invalid_argument("mul: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  return adopt(std::move(out), {a, b},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const> pv, const Tensor&) {
                 for (std::size_t i = 0; i < g.data.size(); ++i) {
                   pg[0]->data[i] += g.data[i] * pv[1]->data[i];
                   pg[1]->data[i] += g.data[i] * pv[0]->data[i];
                 }
               });
}

Value Tape::scale(Value a, double c) {
  Tensor out = value_of(a);
  for (double& x : out.data) x *= c;
  return adopt(std::move(out), {a},
               [c](const Tensor& g, std::span<Tensor* const> pg,
                   std::span<const Tensor* const>, const Tensor&) {
                 for (std::size_t i = 0; i < g.data.size(); ++i) pg[0]->data[i] += c * g.data[i];
               });
}

Value Tape::relu(Value a) {
  Tensor out = value_of(a);
  for (double& x : out.data) x = std::max(x, 0.0);
  return adopt(std::move(out), {a},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const>, const Tensor& out) {
                 for (std::size_t i = 0; i < g.data.size(); ++i) {
                   if (out.data[i] > 0.0) pg[0]->data[i] += g.data[i];
                 }
               });
}

Value Tape::leaky_relu(Value a, double slope) {
  Tensor out = value_of(a);
  for (double& x : out.data) {
    if (x < 0.0) x *= slope;
  }
  return adopt(std::move(out), {a},
               [slope](const Tensor& g, std::span<Tensor* const> pg,
                       std::span<const Tensor* const>, const Tensor& out) {
                 for (std::size_t i = 0; i < g.data.size(); ++i)
                   pg[0]->data[i] += g.data[i] * (out.data[i] > 0.0 ? 1.0 : slope);
               });
}

Value Tape::row_softmax(Value a) {
  Tensor out = value_of(a);
  for (int r = 0; r < out.rows; ++r) {
    double* row = out.row(r);
    double mx = *std::max_element(row, row + out.cols);
    double sum = 0.0;
    for (int c = 0; c < out.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < out.cols; ++c) row[c] /= sum;
  }
  return adopt(std::move(out), {a},
               [](const Tensor& g, std::span<Tensor* const> pg,
                  std::span<const Tensor* const>, const Tensor& out) {
                 for (int r = 0; r < g.rows; ++r) {
                   const double* grow = g.row(r);
                   const double* srow = out.row(r);
                   double dot = 0.0;
                   for (int c = 0; c < g.cols; ++c) dot += grow[c] * srow[c];
                   double* prow = pg[0]->row(r);
                   for (int c = 0; c < g.cols; ++c) prow[c] += srow[c] * (grow[c] - dot);
                 }
               });
}

Value Tape::spmm(const SparseOp& s, const SparseOp& s_t, Value x) {
  const Tensor& tx = value_of(x);
  if (s.cols != tx.rows) throw std::invalid_argument("spmm: shape mismatch");
  if (s_t.rows != s.cols || s_t.cols != s.rows)
    throw std::invalid_argument("spmm: transpose shape mismatch");
  Tensor out(s.rows, tx.cols);
  spmm_into(s, tx, out);
  const SparseOp* st = &s_t;
  return adopt(std::move(out), {x},
               [st](const Tensor& g, std::span<Tensor* const> pg,
                    std::span<const Tensor* const>, const Tensor&) {
                 spmm_into(*st, g, *pg[0]);
               });
}

Value Tape::scale_by_scalar(Value x, Value e, double offset) {
  const Tensor& tx = value_of(x);
  const Tensor& te = value_of(e);
  if (te.rows != 1 || te.cols != 1)
    throw std::invalid_argument("scale_by_scalar: e must be 1x1");
  double factor = offset + te.at(0, 0);
  Tensor out = tx;
  for (double& v : out.data) v *= factor;
  return adopt(std::move(out), {x, e},
               [factor](const Tensor& g, std::span<Tensor* const> pg,
                        std::span<const Tensor* const> pv, const Tensor&) {
                 double de = 0.0;
                 for (std::size_t i = 0; i < g.data.size(); ++i) {
                   pg[0]->data[i] += factor * g.data[i];
                   de += g.data[i] * pv[0]->data[i];
                 }
                 pg[1]->data[0] += de;
               });
}

Value Tape::batch_norm(Value x, Value gamma, Value beta, BatchNormState& state,
                       Mode mode, double momentum, double eps) {
  const Tensor& tx = value_of(x);
  const Tensor& tg = value_of(gamma);
  const Tensor& tb = value_of(beta);
  const int m = tx.rows, c = tx.cols;
  if (tg.rows != 1 || tg.cols != c || tb.rows != 1 || tb.cols != c)
    throw std::invalid_argument("batch_norm: gamma/beta must be 1 x cols");
  if (state.running_mean.cols != c)
    throw std::invalid_argument("batch_norm: state width mismatch");
  if (mode == Mode::kTrain && m < 2)
    throw std::invalid_argument("batch_norm: training batch must have >= 2 rows");

  Tensor xhat(m, c), invstd(1, c);
  if (mode == Mode::kTrain) {
    for (int j = 0; j < c; ++j) {
      double mean = 0.0;
      for (int r = 0; r < m; ++r) mean += tx.at(r, j);
      mean /= m;
      double var = 0.0;
      for (int r = 0; r < m; ++r) {
        double d = tx.at(r, j) - mean;
        var += d * d;
      }
      var /= m;
      double is = 1.0 / std::sqrt(var + eps);
      invstd.data[j] = is;
      for (int r = 0; r < m; ++r) xhat.at(r, j) = (tx.at(r, j) - mean) * is;
      state.running_mean.data[j] = (1.0 - momentum) * state.running_mean.data[j] + momentum * mean;
      double var_unbiased = var * m / (m - 1.0);
      state.running_var.data[j] = (1.0 - momentum) * state.running_var.data[j] + momentum * var_unbiased;
    }
  } else {
    for (int j = 0; j < c; ++j) {
      double is = 1.0 / std::sqrt(state.running_var.data[j] + eps);
      invstd.data[j] = is;
      for (int r = 0; r < m; ++r)
        xhat.at(r, j) = (tx.at(r, j) - state.running_mean.data[j]) * is;
    }
  }
  Tensor out(m, c);
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < c; ++j) out.at(r, j) = tg.data[j] * xhat.at(r, j) + tb.data[j];
  }
  bool train = mode == Mode::kTrain;
  return adopt(std::move(out), {x, gamma, beta},
               [xhat = std::move(xhat), invstd = std::move(invstd), train](
                   const Tensor& g, std::span<Tensor* const> pg,
                   std::span<const Tensor* const> pv, const Tensor&) {
                 const Tensor& gamma_v = *pv[1];
                 const int m = g.rows, c = g.cols;
                 for (int j = 0; j < c; ++j) {
                   double dgamma = 0.0, dbeta = 0.0;
                   for (int r = 0; r < m; ++r) {
                     dgamma += g.at(r, j) * xhat.at(r, j);
                     dbeta += g.at(r, j);
                   }
                   pg[1]->data[j] += dgamma;
                   pg[2]->data[j] += dbeta;
                   double k = gamma_v.data[j] * invstd.data[j];
                   if (train) {
                     double mean_g = dbeta / m;
                     double mean_gx = dgamma / m;
                     for (int r = 0; r < m; ++r)
                       pg[0]->at(r, j) += k * (g.at(r, j) - mean_g - xhat.at(r, j) * mean_gx);
                   } else {
                     for (int r = 0; r < m; ++r) pg[0]->at(r, j) += k * g.at(r, j);
                   }
                 }
               });
}

Value Tape::dropout(Value x, double rate, Mode mode, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("dropout: rate must be in [0,1)");
  const Tensor& tx = value_of(x);
  if (mode == Mode::kEval || rate == 0.0) {
    Tensor out = tx;
    return adopt(std::move(out), {x},
                 [](const Tensor& g, std::span<Tensor* const> pg,
                    std::span<const Tensor* const>, const Tensor&) {
                   for (std::size_t i = 0; i < g.data.size(); ++i) pg[0]->data[i] += g.data[i];
                 });
  }
  double keep = 1.0 - rate;
  Tensor mask(tx.rows, tx.cols);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : mask.data) v = dist(rng) < keep ? 1.0 / keep : 0.0;
  Tensor out = tx;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
  return adopt(std::move(out), {x},
               [mask = std::move(mask)](const Tensor& g, std::span<Tensor* const> pg,
                                        std::span<const Tensor* const>, const Tensor&) {
                 for (std::size_t i = 0; i < g.data.size(); ++i)
                   pg[0]->data[i] += g.data[i] * mask.data[i];
               });
}

Value Tape::global_mean_pool(Value x, const std::vector<int>& graph_of_node,
                             int num_graphs) {
  const Tensor& tx = value_of(x);
  if (static_cast<int>(graph_of_node.size()) != tx.rows)
    throw std::invalid_argument("global_mean_pool: id vector length mismatch");
  std::vector<int> counts(num_graphs, 0);
  for (std::size_t r = 0; r < graph_of_node.size(); ++r) {
    int g = graph_of_node[r];
    if (g < 0 || g >= num_graphs) throw std::invalid_argument("global_mean_pool: bad graph id");
    if (r > 0 && graph_of_node[r] < graph_of_node[r - 1])
      throw std::invalid_argument("global_mean_pool: graph ids must be non-decreasing");
    ++counts[g];
  }
  for (int g = 0; g < num_graphs; ++g) {
    if (counts[g] == 0) throw std::invalid_argument("global_mean_pool: empty graph segment");
  }
  Tensor out(num_graphs, tx.cols);
  for (int r = 0; r < tx.rows; ++r) {
    const double* xr = tx.row(r);
    double* orow = out.row(graph_of_node[r]);
    for (int j = 0; j < tx.cols; ++j) orow[j] += xr[j];
  }
  for (int g = 0; g < num_graphs; ++g) {
    double* orow = out.row(g);
    for (int j = 0; j < tx.cols; ++j) orow[j] /= counts[g];
  }
  return adopt(std::move(out), {x},
               [ids = graph_of_node, counts = std::move(counts)](
                   const Tensor& g, std::span<Tensor* const> pg,
                   std::span<const Tensor* const>, const Tensor&) {
                 Tensor& dx = *pg[0];
                 for (int r = 0; r < dx.rows; ++r) {
                   const double* grow = g.row(ids[r]);
                   double inv = 1.0 / counts[ids[r]];
                   double* drow = dx.row(r);
                   for (int j = 0; j < dx.cols; ++j) drow[j] += grow[j] * inv;
                 }
               });
}

Value Tape::cross_entropy(Value logits, const std::vector<int>& labels) {
  const Tensor& tl = value_of(logits);
  if (static_cast<int>(labels.size()) != tl.rows)
    throw std::invalid_argument("cross_entropy: label count mismatch");
  for (int y : labels) {
    if (y < 0 || y >= tl.cols) throw std::invalid_argument("cross_entropy: label out of range");
  }
  Tensor soft = tl;
  double loss = 0.0;
  for (int r = 0; r < soft.rows; ++r) {
    double* row = soft.row(r);
    double mx = *std::max_element(row, row + soft.cols);
    double sum = 0.0;
    for (int c = 0; c < soft.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < soft.cols; ++c) row[c] /= sum;
    loss -= std::log(row[labels[r]]);
  }
  loss /= tl.rows;
  Tensor out(1, 1);
  out.at(0, 0) = loss;
  return adopt(std::move(out), {logits},
               [soft = std::move(soft), labels](const Tensor& g, std::span<Tensor* const> pg,
                                                std::span<const Tensor* const>, const Tensor&) {
                 double go = g.at(0, 0) / soft.rows;
                 Tensor& dl = *pg[0];
                 for (int r = 0; r < soft.rows; ++r) {
                   const double* srow = soft.row(r);
                   double* drow = dl.row(r);
                   for (int c = 0; c < soft.cols; ++c) drow[c] += go * srow[c];
                   drow[labels[r]] -= go;
                 }
               });
}

}  // namespace graphfam
