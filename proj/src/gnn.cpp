#include "graphfam/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphfam/parallel.hpp"
#include "graphfam/rng.hpp"

namespace graphfam {

BatchedGraphStructure BatchedGraphStructure::build(const std::vector<const Graph*>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("batch: no graphs");
  BatchedGraphStructure s;
  s.num_graphs = static_cast<int>(graphs.size());
  s.graph_offsets.push_back(0);
  for (const Graph* g : graphs) {
    if (g->num_nodes() == 0) throw std::invalid_argument("batch: empty graph");
    s.num_nodes += g->num_nodes();
    s.graph_offsets.push_back(s.num_nodes);
  }
  s.graph_of_node.resize(s.num_nodes);
  for (int gi = 0; gi < s.num_graphs; ++gi) {
    for (int u = s.graph_offsets[gi]; u < s.graph_offsets[gi + 1]; ++u)
      s.graph_of_node[u] = gi;
  }

  auto& norm = s.gcn_norm;
  auto& adj = s.adjacency;
  auto& mean = s.mean_nbr;
  norm.rows = norm.cols = adj.rows = adj.cols = mean.rows = mean.cols = s.num_nodes;
  norm.row_ptr.push_back(0);
  adj.row_ptr.push_back(0);
  mean.row_ptr.push_back(0);
  s.self_nbr_ptr.push_back(0);

  for (int gi = 0; gi < s.num_graphs; ++gi) {
    const Graph& g = *graphs[gi];
    const int base = s.graph_offsets[gi];
    for (int u = 0; u < g.num_nodes(); ++u) {
      const int gu = base + u;
      const double du = g.degree(u);
      const double self_norm = 1.0 / (du + 1.0);

      s.self_nbr.push_back(gu);
      norm.col.push_back(gu);
      norm.coeff.push_back(self_norm);
      for (int v : g.neighbors(u)) {
        const int gv = base + v;
        s.self_nbr.push_back(gv);
        norm.col.push_back(gv);
        norm.coeff.push_back(1.0 / std::sqrt((du + 1.0) * (g.degree(v) + 1.0)));
        adj.col.push_back(gv);
        adj.coeff.push_back(1.0);
        mean.col.push_back(gv);
        mean.coeff.push_back(1.0 / du);
      }
      s.self_nbr_ptr.push_back(static_cast<std::int64_t>(s.self_nbr.size()));
      norm.row_ptr.push_back(static_cast<std::int64_t>(norm.col.size()));
      adj.row_ptr.push_back(static_cast<std::int64_t>(adj.col.size()));
      mean.row_ptr.push_back(static_cast<std::int64_t>(mean.col.size()));
    }
  }
  s.mean_nbr_t = SparseOp::transpose_of(s.mean_nbr);
  return s;
}

std::pair<SparseOp, SparseOp> sampled_mean_operator(const BatchedGraphStructure& s,
                                                    int sample_size,
                                                    std::mt19937_64& rng) {
  if (sample_size < 1) throw std::invalid_argument("sampled_mean_operator: sample_size must be >= 1");
  SparseOp op;
  op.rows = op.cols = s.num_nodes;
  op.row_ptr.push_back(0);
  std::vector<int> pool;
  for (int u = 0; u < s.num_nodes; ++u) {
    const std::int64_t begin = s.self_nbr_ptr[u] + 1;  // skip the self entry
    const std::int64_t end = s.self_nbr_ptr[u + 1];
    const int deg = static_cast<int>(end - begin);
    if (deg <= sample_size) {
      for (std::int64_t i = begin; i < end; ++i) {
        op.col.push_back(s.self_nbr[i]);
        op.coeff.push_back(deg > 0 ? 1.0 / deg : 0.0);
      }
    } else {
      pool.assign(s.self_nbr.begin() + begin, s.self_nbr.begin() + end);
      for (int i = 0; i < sample_size; ++i) {
        int j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(deg - i)));
        std::swap(pool[i], pool[j]);
        op.col.push_back(pool[i]);
        op.coeff.push_back(1.0 / sample_size);
      }
    }
    op.row_ptr.push_back(static_cast<std::int64_t>(op.col.size()));
  }
  SparseOp op_t = SparseOp::transpose_of(op);
  return {std::move(op), std::move(op_t)};
}

Value gcn_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta) {
  return tape.spmm(s.gcn_norm, s.gcn_norm, tape.matmul(x, theta));
}

Value sage_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta) {
  return sage_conv_with_operator(tape, x, s, s.mean_nbr, s.mean_nbr_t, theta);
}

Value sage_conv_with_operator(Tape& tape, Value x, const BatchedGraphStructure&,
                              const SparseOp& mean_op, const SparseOp& mean_op_t,
                              Value theta) {
  Value mean = tape.spmm(mean_op, mean_op_t, x);
  return tape.matmul(tape.concat_cols(x, mean), theta);
}

Value gin_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value w1,
               Value b1, Value w2, Value b2, Value eps) {
  Value pre = tape.add(tape.scale_by_scalar(x, eps, 1.0),
                       tape.spmm(s.adjacency, s.adjacency, x));
  Value hidden = tape.relu(tape.add_row_broadcast(tape.matmul(pre, w1), b1));
  return tape.add_row_broadcast(tape.matmul(hidden, w2), b2);
}

namespace {

// Per-node softmax over the self+neighborhood lists in fixed list order.
// alpha is flat over the self_nbr arrays.
void segment_softmax(const std::vector<std::int64_t>& ptr, std::vector<double>& scores) {
  const int n = static_cast<int>(ptr.size()) - 1;
  for (int u = 0; u < n; ++u) {
    double mx = scores[ptr[u]];
    for (std::int64_t i = ptr[u] + 1; i < ptr[u + 1]; ++i) mx = std::max(mx, scores[i]);
    double sum = 0.0;
    for (std::int64_t i = ptr[u]; i < ptr[u + 1]; ++i) {
      scores[i] = std::exp(scores[i] - mx);
      sum += scores[i];
    }
    for (std::int64_t i = ptr[u]; i < ptr[u + 1]; ++i) scores[i] /= sum;
  }
}

double lrelu(double x, double slope) { return x > 0.0 ? x : slope * x; }

}  // namespace

Value gat_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta,
               Value attn, double leaky_slope) {
  Value h = tape.matmul(x, theta);
  const Tensor& th = h.tensor();
  const Tensor& ta = attn.tensor();
  const int n = th.rows, hd = th.cols;
  if (ta.rows != 1 || ta.cols != 2 * hd)
    throw std::invalid_argument("gat_conv: attention vector must be 1 x 2H");

  // Scores decompose as a_l . h_i + a_r . h_j.
  std::vector<double> left(n), right(n);
  for (int u = 0; u < n; ++u) {
    double l = 0.0, r = 0.0;
    const double* hu = th.row(u);
    for (int d = 0; d < hd; ++d) {
      l += ta.data[d] * hu[d];
      r += ta.data[hd + d] * hu[d];
    }
    left[u] = l;
    right[u] = r;
  }
  std::vector<double> alpha(s.self_nbr.size());
  for (int u = 0; u < n; ++u) {
    for (std::int64_t i = s.self_nbr_ptr[u]; i < s.self_nbr_ptr[u + 1]; ++i)
      alpha[i] = lrelu(left[u] + right[s.self_nbr[i]], leaky_slope);
  }
  segment_softmax(s.self_nbr_ptr, alpha);

  Tensor out(n, hd);
  for (int u = 0; u < n; ++u) {
    double* orow = out.row(u);
    for (std::int64_t i = s.self_nbr_ptr[u]; i < s.self_nbr_ptr[u + 1]; ++i) {
      const double* hj = th.row(s.self_nbr[i]);
      for (int d = 0; d < hd; ++d) orow[d] += alpha[i] * hj[d];
    }
  }

  const BatchedGraphStructure* sp = &s;
  return tape.adopt(
      std::move(out), {h, attn},
      [sp, alpha = std::move(alpha), leaky_slope](
          const Tensor& g, std::span<Tensor* const> pg,
          std::span<const Tensor* const> pv, const Tensor&) {
        const Tensor& hv = *pv[0];
        const Tensor& av = *pv[1];
        const int hd = hv.cols;
        const int ng = sp->num_graphs;
        std::vector<Tensor> da_part(static_cast<std::size_t>(ng), Tensor(1, 2 * hd));
        parallel_for(ng, 1, [&](std::int64_t gb, std::int64_t ge) {
          for (std::int64_t gi = gb; gi < ge; ++gi) {
            Tensor& da = da_part[static_cast<std::size_t>(gi)];
            for (int u = sp->graph_offsets[gi]; u < sp->graph_offsets[gi + 1]; ++u) {
              const double* grow = g.row(u);
              const std::int64_t begin = sp->self_nbr_ptr[u], end = sp->self_nbr_ptr[u + 1];
              // Value path and softmax dot in one sweep.
              double dot = 0.0;
              for (std::int64_t i = begin; i < end; ++i) {
                const int j = sp->self_nbr[i];
                const double* hj = hv.row(j);
                double dal = 0.0;
                for (int d = 0; d < hd; ++d) dal += grow[d] * hj[d];
                dot += alpha[i] * dal;
              }
              double lu = 0.0;
              {
                const double* hu = hv.row(u);
                for (int d = 0; d < hd; ++d) lu += av.data[d] * hu[d];
              }
              for (std::int64_t i = begin; i < end; ++i) {
                const int j = sp->self_nbr[i];
                const double* hj = hv.row(j);
                double* dhj = pg[0]->row(j);
                double dal = 0.0;
                for (int d = 0; d < hd; ++d) dal += grow[d] * hj[d];
                // value path
                for (int d = 0; d < hd; ++d) dhj[d] += alpha[i] * grow[d];
                double ds_e = alpha[i] * (dal - dot);
                double rj = 0.0;
                for (int d = 0; d < hd; ++d) rj += av.data[hd + d] * hj[d];
                double sij = lu + rj;
                double ds = ds_e * (sij > 0.0 ? 1.0 : leaky_slope);
                const double* hu = hv.row(u);
                double* dhu = pg[0]->row(u);
                for (int d = 0; d < hd; ++d) {
                  da.data[d] += ds * hu[d];
                  da.data[hd + d] += ds * hj[d];
                  dhu[d] += ds * av.data[d];
                  dhj[d] += ds * av.data[hd + d];
                }
              }
            }
          }
        });
        for (const Tensor& part : da_part) {
          for (std::size_t i = 0; i < part.data.size(); ++i) pg[1]->data[i] += part.data[i];
        }
      });
}

Value gatv2_conv(Tape& tape, Value x, const BatchedGraphStructure& s,
                 Value theta_l, Value theta_r, Value attn, double leaky_slope) {
  Value hl = tape.matmul(x, theta_l);
  Value hr = tape.matmul(x, theta_r);
  const Tensor& tl = hl.tensor();
  const Tensor& tr = hr.tensor();
  const Tensor& ta = attn.tensor();
  const int n = tl.rows, hd = tl.cols;
  if (ta.rows != 1 || ta.cols != hd)
    throw std::invalid_argument("gatv2_conv: attention vector must be 1 x H");

  std::vector<double> alpha(s.self_nbr.size());
  for (int u = 0; u < n; ++u) {
    const double* lu = tl.row(u);
    for (std::int64_t i = s.self_nbr_ptr[u]; i < s.self_nbr_ptr[u + 1]; ++i) {
      const double* rj = tr.row(s.self_nbr[i]);
      double score = 0.0;
      for (int d = 0; d < hd; ++d) score += ta.data[d] * lrelu(lu[d] + rj[d], leaky_slope);
      alpha[i] = score;
    }
  }
  segment_softmax(s.self_nbr_ptr, alpha);

  Tensor out(n, hd);
  for (int u = 0; u < n; ++u) {
    double* orow = out.row(u);
    for (std::int64_t i = s.self_nbr_ptr[u]; i < s.self_nbr_ptr[u + 1]; ++i) {
      const double* rj = tr.row(s.self_nbr[i]);
      for (int d = 0; d < hd; ++d) orow[d] += alpha[i] * rj[d];
    }
  }

  const BatchedGraphStructure* sp = &s;
  return tape.adopt(
      std::move(out), {hl, hr, attn},
      [sp, alpha = std::move(alpha), leaky_slope](
          const Tensor& g, std::span<Tensor* const> pg,
          std::span<const Tensor* const> pv, const Tensor&) {
        const Tensor& lv = *pv[0];
        const Tensor& rv = *pv[1];
        const Tensor& av = *pv[2];
        const int hd = lv.cols;
        const int ng = sp->num_graphs;
        std::vector<Tensor> da_part(static_cast<std::size_t>(ng), Tensor(1, hd));
        parallel_for(ng, 1, [&](std::int64_t gb, std::int64_t ge) {
          for (std::int64_t gi = gb; gi < ge; ++gi) {
            Tensor& da = da_part[static_cast<std::size_t>(gi)];
            for (int u = sp->graph_offsets[gi]; u < sp->graph_offsets[gi + 1]; ++u) {
              const double* grow = g.row(u);
              const std::int64_t begin = sp->self_nbr_ptr[u], end = sp->self_nbr_ptr[u + 1];
              double dot = 0.0;
              for (std::int64_t i = begin; i < end; ++i) {
                const double* rj = rv.row(sp->self_nbr[i]);
                double dal = 0.0;
                for (int d = 0; d < hd; ++d) dal += grow[d] * rj[d];
                dot += alpha[i] * dal;
              }
              const double* lu = lv.row(u);
              double* dlu = pg[0]->row(u);
              for (std::int64_t i = begin; i < end; ++i) {
                const int j = sp->self_nbr[i];
                const double* rj = rv.row(j);
                double* drj = pg[1]->row(j);
                double dal = 0.0;
                for (int d = 0; d < hd; ++d) dal += grow[d] * rj[d];
                for (int d = 0; d < hd; ++d) drj[d] += alpha[i] * grow[d];
                double ds = alpha[i] * (dal - dot);
                for (int d = 0; d < hd; ++d) {
                  double u_d = lu[d] + rj[d];
                  da.data[d] += ds * lrelu(u_d, leaky_slope);
                  double w = ds * av.data[d] * (u_d > 0.0 ? 1.0 : leaky_slope);
                  dlu[d] += w;
                  drj[d] += w;
                }
              }
            }
          }
        });
        for (const Tensor& part : da_part) {
          for (std::size_t i = 0; i < part.data.size(); ++i) pg[2]->data[i] += part.data[i];
        }
      });
}

Value gtn_conv(Tape& tape, Value x, const BatchedGraphStructure& s, Value theta_q,
               Value theta_k, Value theta_v) {
  Value q = tape.matmul(x, theta_q);
  Value k = tape.matmul(x, theta_k);
  Value v = tape.matmul(x, theta_v);
  const Tensor& tq = q.tensor();
  const Tensor& tk = k.tensor();
  const Tensor& tv = v.tensor();
  const int hd = tq.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  // Per-graph attention matrices, stored flat for the backward pass.
  std::vector<std::int64_t> alpha_off(s.num_graphs + 1, 0);
  for (int gi = 0; gi < s.num_graphs; ++gi) {
    std::int64_t ng = s.graph_offsets[gi + 1] - s.graph_offsets[gi];
    alpha_off[gi + 1] = alpha_off[gi] + ng * ng;
  }
  std::vector<double> alpha(static_cast<std::size_t>(alpha_off[s.num_graphs]));
  Tensor out(tq.rows, tv.cols);
  parallel_for(s.num_graphs, 1, [&](std::int64_t gb, std::int64_t ge) {
    for (std::int64_t gi = gb; gi < ge; ++gi) {
      const int base = s.graph_offsets[gi];
      const int ng = s.graph_offsets[gi + 1] - base;
      double* a = alpha.data() + alpha_off[gi];
      for (int r = 0; r < ng; ++r) {
        const double* qr = tq.row(base + r);
        double* arow = a + static_cast<std::int64_t>(r) * ng;
        double mx = -1e300;
        for (int c = 0; c < ng; ++c) {
          const double* kc = tk.row(base + c);
          double dot = 0.0;
          for (int d = 0; d < hd; ++d) dot += qr[d] * kc[d];
          arow[c] = dot * scale;
          mx = std::max(mx, arow[c]);
        }
        double sum = 0.0;
        for (int c = 0; c < ng; ++c) {
          arow[c] = std::exp(arow[c] - mx);
          sum += arow[c];
        }
        double* orow = out.row(base + r);
        for (int c = 0; c < ng; ++c) {
          arow[c] /= sum;
          const double* vc = tv.row(base + c);
          for (int d = 0; d < tv.cols; ++d) orow[d] += arow[c] * vc[d];
        }
      }
    }
  });

  const BatchedGraphStructure* sp = &s;
  return tape.adopt(
      std::move(out), {q, k, v},
      [sp, alpha = std::move(alpha), alpha_off = std::move(alpha_off), scale](
          const Tensor& g, std::span<Tensor* const> pg,
          std::span<const Tensor* const> pv, const Tensor&) {
        const Tensor& qv = *pv[0];
        const Tensor& kv = *pv[1];
        const Tensor& vv = *pv[2];
        const int hd = qv.cols;
        const int vd = vv.cols;
        parallel_for(sp->num_graphs, 1, [&](std::int64_t gb, std::int64_t ge) {
          for (std::int64_t gi = gb; gi < ge; ++gi) {
            const int base = sp->graph_offsets[gi];
            const int ng = sp->graph_offsets[gi + 1] - base;
            const double* a = alpha.data() + alpha_off[gi];
            std::vector<double> ds(static_cast<std::size_t>(ng) * ng);
            for (int r = 0; r < ng; ++r) {
              const double* grow = g.row(base + r);
              const double* arow = a + static_cast<std::int64_t>(r) * ng;
              double* dsrow = ds.data() + static_cast<std::int64_t>(r) * ng;
              double dot = 0.0;
              for (int c = 0; c < ng; ++c) {
                const double* vc = vv.row(base + c);
                double dac = 0.0;
                for (int d = 0; d < vd; ++d) dac += grow[d] * vc[d];
                dsrow[c] = dac;
                dot += arow[c] * dac;
                // value path
                double* dvc = pg[2]->row(base + c);
                for (int d = 0; d < vd; ++d) dvc[d] += arow[c] * grow[d];
              }
              for (int c = 0; c < ng; ++c) dsrow[c] = arow[c] * (dsrow[c] - dot);
            }
            // dQ += dS K * scale ; dK += dS^T Q * scale
            for (int r = 0; r < ng; ++r) {
              const double* dsrow = ds.data() + static_cast<std::int64_t>(r) * ng;
              double* dqr = pg[0]->row(base + r);
              const double* qr = qv.row(base + r);
              for (int c = 0; c < ng; ++c) {
                double w = dsrow[c] * scale;
                if (w == 0.0) continue;
                const double* kc = kv.row(base + c);
                double* dkc = pg[1]->row(base + c);
                for (int d = 0; d < hd; ++d) {
                  dqr[d] += w * kc[d];
                  dkc[d] += w * qr[d];
                }
              }
            }
          }
        });
      });
}

}  // namespace graphfam
