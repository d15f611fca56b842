#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "graphfam/tensor.hpp"
#include "oracles.hpp"

using namespace graphfam;

namespace {

Tensor ones(int r, int c) { return Tensor::full(r, c, 1.0); }

// Reduces v to a 1x1 node as sum(v * w) so any op can feed a scalar loss.
Value weighted_sum(Tape& tape, Value v, const Tensor& w) {
  Value vw = tape.mul(v, tape.input(w));
  return tape.matmul(tape.matmul(tape.input(ones(1, v.rows())), vw),
                     tape.input(ones(v.cols(), 1)));
}

}  // namespace

TEST_CASE("relu and softmax basics") {
  Tape tape;
  Tensor x(1, 3);
  x.data = {-1.0, 0.0, 2.0};
  Value out = tape.relu(tape.input(x));
  CHECK(out.tensor().data == std::vector<double>{0.0, 0.0, 2.0});

  Tensor c = Tensor::full(1, 4, 0.7);
  Value soft = tape.row_softmax(tape.input(c));
  for (double v : soft.tensor().data) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("primitive gradients match finite differences") {
  Tensor a = oracles::random_tensor(5, 4, 1);
  Tensor b = oracles::random_tensor(4, 6, 2);
  Tensor same = oracles::random_tensor(5, 4, 3);
  Tensor bias = oracles::random_tensor(1, 4, 4);
  Tensor w54 = oracles::random_tensor(5, 4, 5);
  Tensor w56 = oracles::random_tensor(5, 6, 6);
  Tensor w58 = oracles::random_tensor(5, 8, 7);

  SparseOp sp;  // 3x5 sparse operator
  sp.rows = 3;
  sp.cols = 5;
  sp.row_ptr = {0, 2, 3, 5};
  sp.col = {0, 4, 2, 1, 3};
  sp.coeff = {0.5, -1.25, 2.0, 0.75, 1.5};
  SparseOp spt = SparseOp::transpose_of(sp);
  Tensor w34 = oracles::random_tensor(3, 4, 8);
  Tensor eps(1, 1);
  eps.data[0] = 0.3;

  // Each case builds the op from `wrt` (captured as the leaf to differentiate)
  // and reduces to a scalar.
  struct Case {
    const char* name;
    Tensor* wrt;
    std::function<Value(Tape&, Value)> forward;  // forward(tape, leaf_of_wrt)
  };
  std::vector<Case> cases = {
      {"matmul/a", &a,
       [&](Tape& t, Value l) { return weighted_sum(t, t.matmul(l, t.input(b)), w56); }},
      {"matmul/b", &b,
       [&](Tape& t, Value l) { return weighted_sum(t, t.matmul(t.input(a), l), w56); }},
      {"add", &same,
       [&](Tape& t, Value l) { return weighted_sum(t, t.add(t.input(a), l), w54); }},
      {"add_row_broadcast", &bias,
       [&](Tape& t, Value l) {
         return weighted_sum(t, t.add_row_broadcast(t.input(a), l), w54);
       }},
      {"concat_cols", &same,
       [&](Tape& t, Value l) { return weighted_sum(t, t.concat_cols(t.input(a), l), w58); }},
      {"mul", &same,
       [&](Tape& t, Value l) { return weighted_sum(t, t.mul(t.input(a), l), w54); }},
      {"scale", &a, [&](Tape& t, Value l) { return weighted_sum(t, t.scale(l, -1.7), w54); }},
      {"relu", &a, [&](Tape& t, Value l) { return weighted_sum(t, t.relu(l), w54); }},
      {"leaky_relu", &a,
       [&](Tape& t, Value l) { return weighted_sum(t, t.leaky_relu(l, 0.2), w54); }},
      {"row_softmax", &a,
       [&](Tape& t, Value l) { return weighted_sum(t, t.row_softmax(l), w54); }},
      {"spmm", &a, [&](Tape& t, Value l) { return weighted_sum(t, t.spmm(sp, spt, l), w34); }},
      {"scale_by_scalar/x", &a,
       [&](Tape& t, Value l) {
         return weighted_sum(t, t.scale_by_scalar(l, t.input(eps), 1.0), w54);
       }},
      {"scale_by_scalar/eps", &eps,
       [&](Tape& t, Value l) {
         return weighted_sum(t, t.scale_by_scalar(t.input(a), l, 1.0), w54);
       }},
      {"cross_entropy", &a,
       [&](Tape& t, Value l) { return t.cross_entropy(l, std::vector<int>{0, 2, 3, 1, 0}); }},
      {"global_mean_pool", &a,
       [&](Tape& t, Value l) {
         return weighted_sum(t, t.global_mean_pool(l, {0, 0, 1, 1, 1}, 2),
                             oracles::random_tensor(2, 4, 20));
       }},
  };

  for (auto& c : cases) {
    CAPTURE(c.name);
    Tape tape;
    Value leaf = tape.input(*c.wrt);
    Value loss = c.forward(tape, leaf);
    tape.backward(loss);
    double worst = oracles::gradient_check(*c.wrt, tape.grad(leaf), [&] {
      Tape t;
      return c.forward(t, t.input(*c.wrt)).tensor().at(0, 0);
    });
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("batch norm gradients match finite differences") {
  Tensor x = oracles::random_tensor(6, 3, 31);
  Tensor gamma = oracles::random_tensor(1, 3, 32, 0.5);
  for (double& g : gamma.data) g += 1.0;
  Tensor beta = oracles::random_tensor(1, 3, 33, 0.5);
  Tensor w(6, 3);
  w = oracles::random_tensor(6, 3, 34);

  for (Mode mode : {Mode::kTrain, Mode::kEval}) {
    BatchNormState state(3);
    state.running_mean = oracles::random_tensor(1, 3, 35, 0.2);
    state.running_var = Tensor::full(1, 3, 1.3);
    auto build = [&](Tape& t, Value lx, Value lg, Value lb) {
      return weighted_sum(t, t.batch_norm(lx, lg, lb, state, mode), w);
    };
    Tape tape;
    Value lx = tape.input(x), lg = tape.input(gamma), lb = tape.input(beta);
    Value loss = build(tape, lx, lg, lb);
    tape.backward(loss);
    auto f = [&] {
      Tape t;
      return build(t, t.input(x), t.input(gamma), t.input(beta)).tensor().at(0, 0);
    };
    CHECK(oracles::gradient_check(x, tape.grad(lx), f) < 1e-5);
    CHECK(oracles::gradient_check(gamma, tape.grad(lg), f) < 1e-5);
    CHECK(oracles::gradient_check(beta, tape.grad(lb), f) < 1e-5);
  }
}

TEST_CASE("cross entropy value and gradient") {
  Tensor logits = Tensor(3, 5);
  std::vector<int> labels = {0, 3, 2};
  {
    Tape tape;
    Value loss = tape.cross_entropy(tape.input(logits), labels);
    CHECK(loss.tensor().at(0, 0) == doctest::Approx(std::log(5.0)));
  }
  {
    Tensor big(2, 3);
    big.at(0, 0) = 100.0;
    big.at(1, 2) = 100.0;
    Tape tape;
    Value loss = tape.cross_entropy(tape.input(big), {0, 2});
    CHECK(loss.tensor().at(0, 0) < 1e-12);
  }
  {
    Tape tape;
    CHECK_THROWS_AS(tape.cross_entropy(tape.input(logits), {0, 9, 1}),
                    std::invalid_argument);
  }
}

TEST_CASE("adam steps") {
  Parameter p("w", Tensor::full(1, 3, 1.0));
  Tensor grad(1, 3);
  grad.data = {0.5, -2.0, 0.0};
  adam_step(p, grad, 0.1);
  CHECK(p.value.data[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(p.value.data[1] == doctest::Approx(1.0 + 0.1).epsilon(1e-6));
  CHECK(p.value.data[2] == doctest::Approx(1.0));

  // 200 steps on f(theta) = theta^2 from theta = 1.
  Parameter q("q", Tensor::full(1, 1, 1.0));
  for (int i = 0; i < 200; ++i) {
    Tensor g(1, 1);
    g.data[0] = 2.0 * q.value.data[0];
    adam_step(q, g, 0.1);
  }
  CHECK(std::abs(q.value.data[0]) < 1e-2);
}

TEST_CASE("plateau scheduler rule") {
  {
    PlateauScheduler s(1.0);
    for (double loss : {5.0, 4.0, 3.0, 2.0, 1.0, 0.5}) s.step(loss);
    CHECK(s.lr == 1.0);
  }
  {
    PlateauScheduler s(1.0);
    for (int i = 0; i < 6; ++i) s.step(1.0);
    CHECK(s.lr == doctest::Approx(0.5));
  }
  {
    PlateauScheduler s(1.0);
    for (int i = 0; i < 12; ++i) s.step(1.0);
    CHECK(s.lr == doctest::Approx(0.25));
  }
}

TEST_CASE("batch norm statistics") {
  Tensor x = oracles::random_tensor(64, 3, 11, 2.0);
  // Pre-standardize column 0 to zero mean unit variance.
  double mean = 0.0, var = 0.0;
  for (int r = 0; r < x.rows; ++r) mean += x.at(r, 0);
  mean /= x.rows;
  for (int r = 0; r < x.rows; ++r) var += (x.at(r, 0) - mean) * (x.at(r, 0) - mean);
  var /= x.rows;
  for (int r = 0; r < x.rows; ++r) x.at(r, 0) = (x.at(r, 0) - mean) / std::sqrt(var);

  Tensor gamma = Tensor::full(1, 3, 1.0);
  Tensor beta(1, 3);
  BatchNormState state(3);
  Tape tape;
  Value out = tape.batch_norm(tape.input(x), tape.input(gamma), tape.input(beta), state,
                              Mode::kTrain, 0.1, 1e-12);
  for (int r = 0; r < x.rows; ++r)
    CHECK(std::abs(out.tensor().at(r, 0) - x.at(r, 0)) < 1e-6);

  // Column means ~ beta, stds ~ gamma in training mode.
  for (int c = 0; c < 3; ++c) {
    double m = 0.0, v = 0.0;
    for (int r = 0; r < x.rows; ++r) m += out.tensor().at(r, c);
    m /= x.rows;
    for (int r = 0; r < x.rows; ++r) {
      double d = out.tensor().at(r, c) - m;
      v += d * d;
    }
    v /= x.rows;
    CHECK(std::abs(m - 0.0) < 1e-9);
    CHECK(std::sqrt(v) == doctest::Approx(1.0).epsilon(1e-6));
  }

  Tensor single = oracles::random_tensor(1, 3, 12);
  Tape tape2;
  BatchNormState state2(3);
  CHECK_THROWS_AS(tape2.batch_norm(tape2.input(single), tape2.input(gamma),
                                   tape2.input(beta), state2, Mode::kTrain),
                  std::invalid_argument);
}

TEST_CASE("dropout") {
  Tensor x = Tensor::full(200, 500, 1.0);
  std::mt19937_64 rng(9);
  {
    Tape tape;
    Value out = tape.dropout(tape.input(x), 0.0, Mode::kTrain, rng);
    CHECK(out.tensor().data == x.data);
  }
  {
    Tape tape;
    Value out = tape.dropout(tape.input(x), 0.9, Mode::kEval, rng);
    CHECK(out.tensor().data == x.data);
  }
  {
    Tape tape;
    Value out = tape.dropout(tape.input(x), 0.4, Mode::kTrain, rng);
    std::int64_t kept = 0;
    double sum = 0.0;
    for (double v : out.tensor().data) {
      if (v != 0.0) ++kept;
      sum += v;
    }
    double total = static_cast<double>(x.size());
    double frac = static_cast<double>(kept) / total;
    CHECK(std::abs(frac - 0.6) < 3.0 * std::sqrt(0.6 * 0.4 / total));
    CHECK(std::abs(sum / total - 1.0) < 0.02);  // inverted scaling preserves expectation
  }
  Tape tape;
  CHECK_THROWS_AS(tape.dropout(tape.input(x), 1.0, Mode::kTrain, rng),
                  std::invalid_argument);
}

TEST_CASE("global mean pool") {
  Tensor x(3, 1);
  x.data = {1.0, 3.0, 7.0};
  Tape tape;
  Value out = tape.global_mean_pool(tape.input(x), {0, 0, 1}, 2);
  CHECK(out.tensor().at(0, 0) == doctest::Approx(2.0));
  CHECK(out.tensor().at(1, 0) == doctest::Approx(7.0));
  Tape tape2;
  CHECK_THROWS_AS(tape2.global_mean_pool(tape2.input(x), {0, 0, 2}, 3),
                  std::invalid_argument);
}

TEST_CASE("glorot init is deterministic per seed") {
  std::mt19937_64 a(5), b(5);
  CHECK(Tensor::glorot(7, 9, a).data == Tensor::glorot(7, 9, b).data);
}
