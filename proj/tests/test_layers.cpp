#include <cmath>

#include <doctest.h>

#include "aqcast/adam.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/layers.hpp"

using namespace aqcast;

TEST_CASE("lstm cell: all-zero parameters give the fixed point") {
  LstmLayer cell(2, 3);  // params default to zero
  Matrix x(1, 2);
  x(0, 0) = 0.7;
  x(0, 1) = -1.3;
  const Matrix h0(1, 3), c0(1, 3);
  Matrix h, c;
  LstmCache cache;
  cell.cell_step(x, h0, c0, h, c, &cache);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(cache.gate_i.back()(0, i) == 0.5);
    CHECK(cache.gate_f.back()(0, i) == 0.5);
    CHECK(cache.gate_o.back()(0, i) == 0.5);
    CHECK(cache.gate_g.back()(0, i) == 0.0);
    CHECK(c(0, i) == 0.0);
    CHECK(h(0, i) == 0.0);
  }
}

TEST_CASE("lstm cell: saturated forget gate preserves the cell state") {
  LstmLayer cell(1, 2);
  cell.b('f').fill(20.0);  // sigmoid(20) ~ 1 - 2e-9
  Matrix x(1, 1);
  x(0, 0) = 0.0;
  Matrix h0(1, 2);
  Matrix c0(1, 2, 1.0);
  Matrix h, c;
  cell.cell_step(x, h0, c0, h, c, nullptr);
  CHECK(std::abs(c(0, 0) - 1.0) < 1e-8);
  CHECK(std::abs(c(0, 1) - 1.0) < 1e-8);
}

TEST_CASE("lstm cell: H=2 I=1 matches a scalar hand computation") {
  LstmLayer cell(1, 2);
  // small hand-set weights
  cell.w('i')(0, 0) = 0.1;  cell.w('i')(1, 0) = -0.2;
  cell.w('f')(0, 0) = 0.3;  cell.w('f')(1, 0) = 0.1;
  cell.w('g')(0, 0) = -0.4; cell.w('g')(1, 0) = 0.5;
  cell.w('o')(0, 0) = 0.2;  cell.w('o')(1, 0) = 0.3;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      cell.r('i')(a, b) = 0.05 * (1 + static_cast<double>(a + b));
      cell.r('f')(a, b) = -0.04 * (1 + static_cast<double>(a));
      cell.r('g')(a, b) = 0.03 * (1 + static_cast<double>(b));
      cell.r('o')(a, b) = 0.02;
    }
  cell.b('i')(0, 0) = 0.01; cell.b('i')(0, 1) = -0.02;
  cell.b('f')(0, 0) = 0.5;  cell.b('f')(0, 1) = 0.6;
  cell.b('g')(0, 0) = 0.0;  cell.b('g')(0, 1) = 0.1;
  cell.b('o')(0, 0) = -0.1; cell.b('o')(0, 1) = 0.2;

  const double x = 0.8;
  const double h_prev[2] = {0.3, -0.4};
  const double c_prev[2] = {0.2, 0.1};

  Matrix xm(1, 1), hm(1, 2), cm(1, 2);
  xm(0, 0) = x;
  hm(0, 0) = h_prev[0];
  hm(0, 1) = h_prev[1];
  cm(0, 0) = c_prev[0];
  cm(0, 1) = c_prev[1];
  Matrix h, c;
  cell.cell_step(xm, hm, cm, h, c, nullptr);

  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t u = 0; u < 2; ++u) {
    const double ai = cell.w('i')(u, 0) * x + cell.r('i')(u, 0) * h_prev[0] +
                      cell.r('i')(u, 1) * h_prev[1] + cell.b('i')(0, u);
    const double af = cell.w('f')(u, 0) * x + cell.r('f')(u, 0) * h_prev[0] +
                      cell.r('f')(u, 1) * h_prev[1] + cell.b('f')(0, u);
    const double ag = cell.w('g')(u, 0) * x + cell.r('g')(u, 0) * h_prev[0] +
                      cell.r('g')(u, 1) * h_prev[1] + cell.b('g')(0, u);
    const double ao = cell.w('o')(u, 0) * x + cell.r('o')(u, 0) * h_prev[0] +
                      cell.r('o')(u, 1) * h_prev[1] + cell.b('o')(0, u);
    const double expected_c = sigmoid(af) * c_prev[u] + sigmoid(ai) * std::tanh(ag);
    const double expected_h = sigmoid(ao) * std::tanh(expected_c);
    CHECK(std::abs(c(0, u) - expected_c) < 1e-12);
    CHECK(std::abs(h(0, u) - expected_h) < 1e-12);
  }
}

TEST_CASE("lstm cell: gate outputs stay inside (0,1) and states finite") {
  Rng rng(3);
  LstmLayer cell(3, 4);
  cell.init(rng);
  Matrix x(2, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_range(-5.0, 5.0);
  Matrix h0(2, 4), c0(2, 4);
  Matrix h, c;
  LstmCache cache;
  cell.cell_step(x, h0, c0, h, c, &cache);
  for (const Matrix* g : {&cache.gate_i.back(), &cache.gate_f.back(), &cache.gate_o.back()})
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(g->data()[i] > 0.0);
      CHECK(g->data()[i] < 1.0);
    }
  CHECK(all_finite(h));
  CHECK(all_finite(c));
}

TEST_CASE("lstm cell: shape mismatches throw") {
  LstmLayer cell(2, 3);
  Matrix x(1, 5), h0(1, 3), c0(1, 3), h, c;
  CHECK_THROWS_AS(cell.cell_step(x, h0, c0, h, c, nullptr), ShapeError);
  Matrix x2(1, 2), hbad(1, 4);
  CHECK_THROWS_AS(cell.cell_step(x2, hbad, c0, h, c, nullptr), ShapeError);
}

TEST_CASE("lstm sequence: zero upstream gradients give zero parameter gradients") {
  Rng rng(5);
  LstmLayer layer(2, 3);
  layer.init(rng);
  std::vector<Matrix> xs(4, Matrix(2, 2));
  for (Matrix& x : xs)
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_range(-1.0, 1.0);

  LstmCache cache;
  layer.forward(xs, &cache);
  layer.zero_grads();
  std::vector<Matrix> dh(4, Matrix(2, 3));
  layer.backward(dh, cache);
  for (const ParamRef& p : layer.params("l")) {
    for (std::size_t i = 0; i < p.grad->size(); ++i) CHECK(p.grad->data()[i] == 0.0);
  }
}

TEST_CASE("lstm sequence: duplicated batch row doubles its gradient contribution") {
  Rng rng(6);
  LstmLayer layer(2, 3);
  layer.init(rng);

  auto run = [&layer](const std::vector<Matrix>& xs, const Matrix& dh_last) {
    LstmCache cache;
    layer.forward(xs, &cache);
    layer.zero_grads();
    std::vector<Matrix> dh(xs.size(), Matrix(xs[0].rows(), 3));
    dh.back() = dh_last;
    layer.backward(dh, cache);
    std::vector<double> flat;
    for (const ParamRef& p : layer.params("l"))
      flat.insert(flat.end(), p.grad->raw().begin(), p.grad->raw().end());
    return flat;
  };

  // one window
  std::vector<Matrix> one(3, Matrix(1, 2));
  for (Matrix& x : one)
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_range(-1.0, 1.0);
  Matrix dh1(1, 3);
  for (std::size_t i = 0; i < dh1.size(); ++i) dh1.data()[i] = rng.next_range(-1.0, 1.0);
  const auto g_single = run(one, dh1);

  // the same window twice in one batch
  std::vector<Matrix> two(3, Matrix(2, 2));
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t f = 0; f < 2; ++f) two[s](b, f) = one[s](0, f);
  Matrix dh2(2, 3);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t u = 0; u < 3; ++u) dh2(b, u) = dh1(0, u);
  const auto g_double = run(two, dh2);

  REQUIRE(g_single.size() == g_double.size());
  for (std::size_t i = 0; i < g_single.size(); ++i)
    CHECK(g_double[i] == doctest::Approx(2.0 * g_single[i]).epsilon(1e-12));
}

TEST_CASE("lstm parameter count formula") {
  CHECK(LstmLayer(11, 50).param_count() == 12400);
  CHECK(LstmLayer(1, 50).param_count() == 4 * (50 * 51 + 50));
}

TEST_CASE("dense layer gradients match finite differences") {
  Rng rng(8);
  DenseLayer layer(4, 3, Activation::relu);
  layer.init(rng);
  Matrix x(5, 4), target(5, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_range(-1.0, 1.0);
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] = rng.next_range(-1.0, 1.0);

  DenseCache cache;
  const Matrix y = layer.forward(x, &cache);
  const auto [loss, dy] = mse_loss(y, target);
  (void)loss;
  layer.zero_grads();
  layer.backward(dy, cache);

  const double eps = 1e-6;
  for (ParamRef p : layer.params("d")) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double saved = p.value->data()[i];
      p.value->data()[i] = saved + eps;
      const double lp = mse_loss(layer.forward(x, nullptr), target).loss;
      p.value->data()[i] = saved - eps;
      const double lm = mse_loss(layer.forward(x, nullptr), target).loss;
      p.value->data()[i] = saved;
      const double numeric = (lp - lm) / (2 * eps);
      CHECK(p.grad->data()[i] == doctest::Approx(numeric).epsilon(1e-5));
    }
  }
}

TEST_CASE("mse loss: examples and finite-difference gradient") {
  Matrix same(1, 3);
  same(0, 0) = 1;
  same(0, 1) = 2;
  same(0, 2) = 3;
  const auto identical = mse_loss(same, same);
  CHECK(identical.loss == 0.0);
  for (std::size_t i = 0; i < identical.gradient.size(); ++i)
    CHECK(identical.gradient.data()[i] == 0.0);

  Matrix pred(1, 2), target(1, 2);
  pred(0, 0) = 3;
  pred(0, 1) = 4;
  const auto r = mse_loss(pred, target);
  CHECK(r.loss == doctest::Approx(12.5));
  CHECK(r.gradient(0, 0) == doctest::Approx(3.0));
  CHECK(r.gradient(0, 1) == doctest::Approx(4.0));

  // finite differences of the loss wrt predictions
  const double eps = 1e-7;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    Matrix p = pred;
    p.data()[i] += eps;
    const double lp = mse_loss(p, target).loss;
    p.data()[i] -= 2 * eps;
    const double lm = mse_loss(p, target).loss;
    const double numeric = (lp - lm) / (2 * eps);
    CHECK(r.gradient.data()[i] == doctest::Approx(numeric).epsilon(1e-8));
  }

  Matrix bad(1, 3);
  CHECK_THROWS_AS(mse_loss(pred, bad), ShapeError);
}

TEST_CASE("adam: first step closed form") {
  Matrix theta(1, 1);
  Matrix grad(1, 1, 1.0);
  AdamOptimizer adam;  // alpha 1e-3, betas 0.9/0.999, eps 1e-8
  std::vector<ParamRef> refs{{"theta", &theta, &grad}};
  adam.attach(refs);
  adam.step(refs);
  // m_hat = v_hat = 1 on the first unit-gradient step
  const double alpha = 1e-3;
  const double closed_form = -alpha / (1.0 + 1e-8);
  CHECK(std::abs(theta(0, 0) - closed_form) < 1e-10 * alpha);
  CHECK(std::abs(theta(0, 0) + alpha) < 1e-7 * alpha);
}

TEST_CASE("adam: zero gradient and alpha=0 are fixed points") {
  Matrix theta(2, 2);
  for (std::size_t i = 0; i < theta.size(); ++i) theta.data()[i] = 1.0 + static_cast<double>(i);
  Matrix grad(2, 2);  // zero
  const Matrix before = theta;

  AdamOptimizer adam;
  std::vector<ParamRef> refs{{"theta", &theta, &grad}};
  adam.attach(refs);
  for (int i = 0; i < 10; ++i) adam.step(refs);
  CHECK(theta == before);

  AdamHyper frozen;
  frozen.alpha = 0.0;
  AdamOptimizer noop(frozen);
  noop.attach(refs);
  grad.fill(3.7);
  for (int i = 0; i < 10; ++i) noop.step(refs);
  CHECK(theta == before);
}

TEST_CASE("adam: update is odd in the gradient") {
  Matrix theta(1, 2);
  Matrix grad(1, 2);
  grad(0, 0) = 0.37;
  grad(0, 1) = -0.37;
  AdamOptimizer adam;
  std::vector<ParamRef> refs{{"theta", &theta, &grad}};
  adam.attach(refs);
  for (int i = 0; i < 5; ++i) adam.step(refs);
  CHECK(theta(0, 0) == doctest::Approx(-theta(0, 1)).epsilon(1e-15));
}

TEST_CASE("adam: 100-step 1-D quadratic matches an independent reference loop") {
  // objective f(x) = (x - 3)^2, gradient 2(x-3)
  Matrix theta(1, 1);
  Matrix grad(1, 1);
  AdamHyper hp;
  hp.alpha = 0.05;
  AdamOptimizer adam(hp);
  std::vector<ParamRef> refs{{"x", &theta, &grad}};
  adam.attach(refs);

  // reference loop written directly from the update equations
  double x_ref = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    grad(0, 0) = 2.0 * (theta(0, 0) - 3.0);
    adam.step(refs);

    const double g = 2.0 * (x_ref - 3.0);
    m = hp.beta1 * m + (1 - hp.beta1) * g;
    v = hp.beta2 * v + (1 - hp.beta2) * g * g;
    const double m_hat = m / (1 - std::pow(hp.beta1, t));
    const double v_hat = v / (1 - std::pow(hp.beta2, t));
    x_ref -= hp.alpha * m_hat / (std::sqrt(v_hat) + hp.epsilon);

    REQUIRE(std::abs(theta(0, 0) - x_ref) < 1e-12);
  }
}
