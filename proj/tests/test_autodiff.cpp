#include <doctest.h>

#include <cmath>

#include "eegbench/adam.hpp"
#include "eegbench/autodiff.hpp"
#include "eegbench/rng.hpp"

using namespace eegbench;
using namespace eegbench::ad;

namespace {

Tensor randn(Shape shape, std::uint64_t stream, bool grad = true, double scale = 1.0) {
  CounterRng rng(77, stream);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = scale * rng.normal();
  return Tensor(std::move(shape), std::move(v), grad);
}

// Reduces any tensor to a scalar with fixed random weights so every output element matters.
Tensor weighted_sum(Tape& tape, const Tensor& y) {
  const Tensor w = randn(y.shape(), 999, false);
  return sum(tape, mul(tape, y, w));
}

constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("forward examples") {
  Tape tape;
  CHECK(relu(tape, Tensor({3}, {-1, 0, 2})).values() == std::vector<double>{0, 0, 2});
  const Tensor x = randn({1, 1, 8}, 1);
  const Tensor w = randn({1, 1, 3}, 2);
  CHECK(conv1d(tape, x, w, Tensor(), {1, 1}).shape() == Shape{1, 1, 8});
  CHECK(mse(tape, x, x.clone()).item() == 0.0);
  CHECK_THROWS_AS(matmul(tape, randn({2, 3}, 3), randn({2, 3}, 4)), ShapeError);
  CHECK_THROWS_WITH(add(tape, randn({2, 3}, 3), randn({3, 2}, 4)), doctest::Contains("add"));
}

TEST_CASE("backward examples") {
  Tape tape;
  const Tensor w = randn({5}, 1);
  const Tensor x = randn({5}, 2, false);
  const Tensor loss = sum(tape, mul(tape, w, x));
  tape.backward(loss);
  for (std::size_t i = 0; i < 5; ++i) CHECK(w.grad()[i] == doctest::Approx(x.values()[i]));

  Tape t2;
  const Tensor p = randn({2, 3}, 3), q = randn({2, 3}, 4, false);
  t2.backward(mse(t2, p, q));
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(p.grad()[i] == doctest::Approx(2 * (p.values()[i] - q.values()[i]) / 6.0));

  Tape t3;
  const Tensor unused = randn({4}, 5);
  unused.grad()[0] = 3.0;
  const Tensor a = randn({3}, 6);
  t3.push({PrimitiveKind::add, {unused}, {unused}, [] {}});
  t3.backward(sum(t3, a));
  for (double g : unused.grad()) CHECK(g == 0.0);

  Tape t4;
  CHECK_THROWS_AS(t4.backward(relu(t4, a)), InvalidInput);
}

TEST_CASE("backward is linear in the loss") {
  const Tensor w = randn({3, 4}, 1), x = randn({2, 3}, 2, false);
  auto grad_of = [&](double a, double b) {
    Tape tape;
    const Tensor y = matmul(tape, x, w);
    const Tensor l1 = sum(tape, tanh(tape, y));
    const Tensor l2 = sum(tape, mul(tape, y, y));
    const Tensor loss = add(tape, scale(tape, l1, a), scale(tape, l2, b));
    tape.backward(loss);
    return w.grad();
  };
  const auto g1 = grad_of(1, 0), g2 = grad_of(0, 1), g = grad_of(2.5, -0.5);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(2.5 * g1[i] - 0.5 * g2[i]));
}

TEST_CASE("gradient check per primitive") {
  SUBCASE("dense + mse") {
    const Tensor x = randn({4, 3}, 1, false), w = randn({3, 2}, 2), b = randn({2}, 3), t = randn({4, 2}, 4, false);
    const auto r = grad_check([&](Tape& tp) { return mse(tp, add_bias(tp, matmul(tp, x, w), b), t); }, {w, b});
    CHECK(r.max_rel_error < 1e-6);
    CHECK(r.checked == 8);
  }
  SUBCASE("matmul both operands") {
    const Tensor a = randn({3, 4}, 1), b = randn({4, 2}, 2);
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, matmul(tp, a, b)); }, {a, b}).max_rel_error < kTol);
  }
  SUBCASE("add, mul, scale") {
    const Tensor a = randn({2, 3}, 1), b = randn({2, 3}, 2);
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, scale(tp, mul(tp, add(tp, a, b), a), -1.7)); },
                     {a, b})
              .max_rel_error < kTol);
  }
  SUBCASE("activations") {
    const Tensor a = randn({3, 5}, 3);
    // Keep relu inputs away from the kink.
    for (double& v : a.raw()->value)
      if (std::abs(v) < 0.05) v = 0.3;
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, relu(tp, a)); }, {a}).max_rel_error < kTol);
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, sigmoid(tp, a)); }, {a}).max_rel_error < kTol);
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, tanh(tp, a)); }, {a}).max_rel_error < kTol);
  }
  SUBCASE("conv1d with stride and padding") {
    for (Conv1dParams p : {Conv1dParams{1, 1}, Conv1dParams{2, 2}, Conv1dParams{1, 0}}) {
      const Tensor x = randn({2, 3, 9}, 1), w = randn({4, 3, 3}, 2), b = randn({4}, 3);
      CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, conv1d(tp, x, w, b, p)); }, {x, w, b})
                .max_rel_error < kTol);
    }
  }
  SUBCASE("dropout") {
    const Tensor x = randn({2, 4}, 1);
    const std::vector<double> mask = {1, 0, 1, 1, 0, 1, 1, 0};
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, dropout(tp, x, mask, 0.8)); }, {x}).max_rel_error <
          kTol);
  }
  SUBCASE("batchnorm training mode") {
    for (Shape s : {Shape{6, 3}, Shape{4, 3, 5}}) {
      const Tensor x = randn(s, 1), g = randn({3}, 2), b = randn({3}, 3);
      BatchNormState st{std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)};
      CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, batchnorm1d(tp, x, g, b, st, true)); }, {x, g, b})
                .max_rel_error < kTol);
    }
  }
  SUBCASE("batchnorm evaluation mode") {
    const Tensor x = randn({4, 3, 5}, 1), g = randn({3}, 2), b = randn({3}, 3);
    BatchNormState st{{0.1, -0.2, 0.3}, {1.5, 0.7, 2.0}};
    CHECK(grad_check([&](Tape& tp) { return weighted_sum(tp, batchnorm1d(tp, x, g, b, st, false)); }, {x, g, b})
              .max_rel_error < kTol);
  }
  SUBCASE("reshape, flatten, slice, concat") {
    const Tensor a = randn({2, 3, 4}, 1), b = randn({2, 2, 4}, 2);
    CHECK(grad_check(
              [&](Tape& tp) {
                const Tensor c = concat(tp, {a, b}, 1);
                const Tensor s = slice(tp, c, 2, 1, 2);
                return weighted_sum(tp, tanh(tp, reshape(tp, flatten(tp, s), {4, 5})));
              },
              {a, b})
              .max_rel_error < kTol);
  }
  SUBCASE("lstm cell unrolled five steps") {
    const std::size_t B = 2, I = 3, H = 4;
    const Tensor wx = randn({I, 4 * H}, 1, true, 0.5), wh = randn({H, 4 * H}, 2, true, 0.5), bias = randn({4 * H}, 3);
    const Tensor xs = randn({B, 5 * I}, 4);
    CHECK(grad_check(
              [&](Tape& tp) {
                LstmState st{Tensor::zeros({B, H}), Tensor::zeros({B, H})};
                std::vector<Tensor> hs;
                for (std::size_t t = 0; t < 5; ++t) {
                  st = lstm_cell(tp, slice(tp, xs, 1, t * I, I), st, wx, wh, bias);
                  hs.push_back(st.h);
                }
                return weighted_sum(tp, concat(tp, hs, 1));
              },
              {wx, wh, bias, xs})
              .max_rel_error < kTol);
  }
}

TEST_CASE("grad_check preconditions") {
  const Tensor a = randn({2}, 1);
  auto fn = [&](Tape& tp) { return sum(tp, a); };
  CHECK_THROWS_AS(grad_check(fn, {a}, 1e-8), InvalidInput);
  CHECK_THROWS_AS(grad_check(fn, {a}, 1e-2), InvalidInput);
  a.raw()->value[0] = NAN;
  CHECK_THROWS_AS(grad_check(fn, {a}), NumericError);
}

TEST_CASE("dropout") {
  Tape tape;
  const Tensor x = randn({3, 4}, 1);
  const std::vector<double> ones(12, 1.0);
  CHECK(dropout(tape, x, ones, 1.0).values() == x.values());

  // Averaged over many masks, inverted dropout preserves the activation.
  CounterRng rng(5);
  const double keep = 0.8;
  const Tensor v({1}, {2.0});
  double acc = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const std::vector<double> m = {rng.uniform() < keep ? 1.0 : 0.0};
    Tape t;
    acc += dropout(t, v, m, keep).values()[0];
  }
  CHECK(acc / trials == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("batchnorm normalizes per feature in training mode") {
  Tape tape;
  const Tensor x = randn({8, 3, 6}, 1, false, 4.0);
  for (double& v : x.raw()->value) v += 2.5;
  BatchNormState st{std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)};
  const Tensor y = batchnorm1d(tape, x, Tensor({3}, {1, 1, 1}), Tensor({3}, {0, 0, 0}), st, true);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t t = 0; t < 6; ++t) m += y.values()[(b * 3 + c) * 6 + t];
    m /= 48;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t t = 0; t < 6; ++t) v += std::pow(y.values()[(b * 3 + c) * 6 + t] - m, 2);
    v /= 48;
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(v - 1) < 1e-6);
    CHECK(st.running_mean[c] != 0.0);
  }
}

TEST_CASE("adam") {
  SUBCASE("first step moves by alpha against the gradient sign") {
    Tensor p({3}, {1.0, -2.0, 0.5}, true);
    p.grad() = {0.3, -4.0, 1e-3};
    std::vector<Tensor> ps = {p};
    AdamState adam;
    adam.step(ps);
    CHECK(p.values()[0] == doctest::Approx(1.0 - 5e-5).epsilon(1e-9));
    CHECK(p.values()[1] == doctest::Approx(-2.0 + 5e-5).epsilon(1e-9));
    CHECK(p.values()[2] == doctest::Approx(0.5 - 5e-5).epsilon(1e-4));
    CHECK(adam.t() == 1);
    for (double v : adam.second_moment()[0]) CHECK(v >= 0);
  }
  SUBCASE("zero gradient leaves parameters") {
    Tensor p({2}, {1.0, 2.0}, true);
    p.zero_grad();
    std::vector<Tensor> ps = {p};
    AdamState adam;
    adam.step(ps);
    adam.step(ps);
    CHECK(p.values() == std::vector<double>{1.0, 2.0});
    CHECK(adam.t() == 2);
  }
  SUBCASE("deterministic and shape-checked") {
    auto run = [] {
      Tensor w = randn({4, 2}, 1);
      const Tensor x = randn({3, 4}, 2, false), t = randn({3, 2}, 3, false);
      std::vector<Tensor> ps = {w};
      AdamState adam;
      for (int k = 0; k < 10; ++k) {
        Tape tape;
        tape.backward(mse(tape, matmul(tape, x, w), t));
        adam.step(ps);
      }
      return w.values();
    };
    CHECK(run() == run());
    Tensor a({2}, {1, 2}, true), b({3}, {1, 2, 3}, true);
    std::vector<Tensor> first = {a}, second = {b};
    a.zero_grad();
    b.zero_grad();
    AdamState adam;
    adam.step(first);
    CHECK_THROWS_AS(adam.step(second), ShapeError);
  }
}
