#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "graphfam/generators.hpp"

namespace oracles {

using graphfam::Graph;
using graphfam::Tensor;

std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const int n = g.num_nodes();
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int u = 0; u < n; ++u) {
    d[u][u] = 0;
    for (int v : g.neighbors(u)) d[u][v] = 1;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  for (auto& row : d) {
    for (int& v : row) {
      if (v >= inf) v = -1;
    }
  }
  return d;
}

EigenDecomposition jacobi_eigen(std::vector<std::vector<double>> a, int sweeps) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    out.values[i] = a[i][i];
    for (int k = 0; k < n; ++k) out.vectors[i][k] = v[k][i];
  }
  return out;
}

std::vector<double> principal_eigenvector(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int u = 0; u < n; ++u) {
    for (int v : g.neighbors(u)) a[u][v] = 1.0;
  }
  EigenDecomposition eig = jacobi_eigen(std::move(a));
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (eig.values[i] > eig.values[best]) best = i;
  }
  std::vector<double> vec = eig.vectors[best];
  double norm = 0.0, sum = 0.0;
  for (double x : vec) {
    norm += x * x;
    sum += x;
  }
  norm = std::sqrt(norm);
  double sign = sum >= 0.0 ? 1.0 : -1.0;
  for (double& x : vec) x = sign * x / norm;
  return vec;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("pearson: bad input");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  double cov = sxy - sx * sy / n;
  double vx = sxx - sx * sx / n;
  double vy = syy - sy * sy / n;
  return cov / std::sqrt(vx * vy);
}

std::vector<double> clustering_by_enumeration(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<double> c(n, 0.0);
  for (int u = 0; u < n; ++u) {
    int deg = g.degree(u);
    if (deg < 2) continue;
    int links = 0;
    auto nb = g.neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        if (g.has_edge(nb[i], nb[j])) ++links;
      }
    }
    c[u] = 2.0 * links / (static_cast<double>(deg) * (deg - 1));
  }
  return c;
}

namespace {

double lrelu(double x, double slope) { return x > 0.0 ? x : slope * x; }

std::vector<double> matvec(const Tensor& m, const double* x_row, int dim) {
  // y = x * M for a row vector x (dim = M.rows)
  std::vector<double> y(m.cols, 0.0);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < m.cols; ++c) y[c] += x_row[r] * m.at(r, c);
  }
  return y;
}

}  // namespace

Tensor dense_gat(const Graph& g, const Tensor& x, const Tensor& theta,
                 const Tensor& attn, double slope) {
  const int n = g.num_nodes();
  const int hd = theta.cols;
  std::vector<std::vector<double>> h(n);
  for (int u = 0; u < n; ++u) h[u] = matvec(theta, x.row(u), x.cols);
  Tensor out(n, hd);
  for (int i = 0; i < n; ++i) {
    std::vector<int> hood = {i};
    for (int j : g.neighbors(i)) hood.push_back(j);
    std::vector<double> e;
    for (int j : hood) {
      double s = 0.0;
      for (int d = 0; d < hd; ++d)
        s += attn.at(0, d) * h[i][d] + attn.at(0, hd + d) * h[j][d];
      e.push_back(lrelu(s, slope));
    }
    double mx = *std::max_element(e.begin(), e.end());
    double z = 0.0;
    for (double& v : e) {
      v = std::exp(v - mx);
      z += v;
    }
    for (std::size_t k = 0; k < hood.size(); ++k) {
      for (int d = 0; d < hd; ++d) out.at(i, d) += (e[k] / z) * h[hood[k]][d];
    }
  }
  return out;
}

Tensor dense_gatv2(const Graph& g, const Tensor& x, const Tensor& theta_l,
                   const Tensor& theta_r, const Tensor& attn, double slope) {
  const int n = g.num_nodes();
  const int hd = theta_l.cols;
  std::vector<std::vector<double>> hl(n), hr(n);
  for (int u = 0; u < n; ++u) {
    hl[u] = matvec(theta_l, x.row(u), x.cols);
    hr[u] = matvec(theta_r, x.row(u), x.cols);
  }
  Tensor out(n, hd);
  for (int i = 0; i < n; ++i) {
    std::vector<int> hood = {i};
    for (int j : g.neighbors(i)) hood.push_back(j);
    std::vector<double> e;
    for (int j : hood) {
      double s = 0.0;
      for (int d = 0; d < hd; ++d) s += attn.at(0, d) * lrelu(hl[i][d] + hr[j][d], slope);
      e.push_back(s);
    }
    double mx = *std::max_element(e.begin(), e.end());
    double z = 0.0;
    for (double& v : e) {
      v = std::exp(v - mx);
      z += v;
    }
    for (std::size_t k = 0; k < hood.size(); ++k) {
      for (int d = 0; d < hd; ++d) out.at(i, d) += (e[k] / z) * hr[hood[k]][d];
    }
  }
  return out;
}

Tensor dense_gtn(const Graph& g, const Tensor& x, const Tensor& theta_q,
                 const Tensor& theta_k, const Tensor& theta_v) {
  const int n = g.num_nodes();
  const int hd = theta_q.cols;
  std::vector<std::vector<double>> q(n), k(n), v(n);
  for (int u = 0; u < n; ++u) {
    q[u] = matvec(theta_q, x.row(u), x.cols);
    k[u] = matvec(theta_k, x.row(u), x.cols);
    v[u] = matvec(theta_v, x.row(u), x.cols);
  }
  Tensor out(n, theta_v.cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n);
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int d = 0; d < hd; ++d) dot += q[i][d] * k[j][d];
      e[j] = dot * scale;
    }
    double mx = *std::max_element(e.begin(), e.end());
    double z = 0.0;
    for (double& s : e) {
      s = std::exp(s - mx);
      z += s;
    }
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < theta_v.cols; ++d) out.at(i, d) += (e[j] / z) * v[j][d];
    }
  }
  return out;
}

double gradient_check(Tensor& param, const Tensor& analytic_grad,
                      const std::function<double()>& f, double h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    double saved = param.data[i];
    param.data[i] = saved + h;
    double up = f();
    param.data[i] = saved - h;
    double down = f();
    param.data[i] = saved;
    double numeric = (up - down) / (2.0 * h);
    double analytic = analytic_grad.data[i];
    double err = std::abs(analytic - numeric) /
                 std::max({1.0, std::abs(analytic), std::abs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

Graph random_connected_graph(int n, double p, std::uint64_t seed, int min_nodes) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Graph g = graphfam::generate_er({n, p}, seed + attempt * 1000003ULL);
    Graph lcc = graphfam::largest_connected_subgraph(g);
    if (lcc.num_nodes() >= min_nodes && lcc.num_edges() >= 1) return lcc;
  }
  throw std::runtime_error("random_connected_graph: could not build a usable graph");
}

Tensor random_tensor(int rows, int cols, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor t(rows, cols);
  for (double& x : t.data) x = dist(rng);
  return t;
}

}  // namespace oracles
