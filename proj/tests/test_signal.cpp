#include <doctest.h>

#include <cmath>

#include "eegbench/rng.hpp"
#include "eegbench/signal.hpp"

using namespace eegbench;

namespace {

Segment noise(std::size_t n, std::uint64_t seed, int fs = 256) {
  CounterRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return Segment(v, fs);
}

}  // namespace

TEST_CASE("segment rejects empty, non-finite and bad rate") {
  CHECK_THROWS_AS(Segment({}, 256), InvalidInput);
  CHECK_THROWS_AS(Segment({1.0, NAN}, 256), InvalidInput);
  CHECK_THROWS_AS(Segment({1.0}, 0), InvalidInput);
}

TEST_CASE("rms") {
  CHECK(rms(Segment({3, 4}, 1)) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rms(Segment({0, 0, 0}, 1)) == 0.0);
  CHECK(rms(Segment({-2.5, -2.5}, 1)) == doctest::Approx(2.5));
  CHECK_THROWS_AS(rms(std::span<const double>{}), InvalidInput);
}

TEST_CASE("lambda_for_snr closed forms") {
  const Segment x({2, -2, 2, -2}, 1);
  const Segment n({1, -1, 1, -1}, 1);
  CHECK(lambda_for_snr(n, n, 0) == doctest::Approx(1.0));
  CHECK(lambda_for_snr(x, n, 10) == doctest::Approx(0.2));
  CHECK(lambda_for_snr(n, n, -7) == doctest::Approx(std::pow(10.0, 0.7)));
  CHECK_THROWS_AS(lambda_for_snr(x, Segment({0, 0, 0, 0}, 1), 0), DegenerateSignal);
}

TEST_CASE("mix") {
  const Segment x({1, 1}, 1), n({2, 2}, 1);
  CHECK(mix(x, n, 0).samples() == x.samples());
  CHECK(mix(x, n, 0.5).samples() == std::vector<double>{2, 2});
  CHECK_THROWS_AS(mix(x, Segment({1, 2, 3}, 1), 1), ShapeError);
  CHECK_THROWS_AS(mix(x, Segment({1, 2}, 2), 1), ShapeError);

  // Linear in lambda.
  const Segment a = noise(64, 1), b = noise(64, 2);
  const Segment m1 = mix(a, b, 0.3), m2 = mix(a, b, 0.9), m12 = mix(a, b, 1.2);
  for (std::size_t i = 0; i < 64; ++i) CHECK(m1[i] + m2[i] - a[i] == doctest::Approx(m12[i]).epsilon(1e-12));
}

TEST_CASE("snr_of") {
  const Segment x({1, -1}, 1);
  CHECK(snr_of(x, x) == doctest::Approx(0.0));
  CHECK(snr_of(x.scaled(10), x) == doctest::Approx(10.0));
  CHECK_THROWS_AS(snr_of(x, Segment({0, 0}, 1)), DegenerateSignal);
}

TEST_CASE("snr round trip at every level") {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Segment x = noise(512, 2 * k), n = noise(512, 2 * k + 1);
    for (int level = -7; level <= 2; ++level) {
      const double lam = lambda_for_snr(x, n, level);
      CHECK(std::abs(snr_of(x, n.scaled(lam)) - level) < 1e-9);
    }
  }
}

TEST_CASE("standardize") {
  CHECK(standardize(Segment({0, 2}, 1)).samples() == std::vector<double>{-1, 1});
  CHECK_THROWS_AS(standardize(Segment({3, 3}, 1)), DegenerateSignal);
  const Segment s = standardize(noise(100, 9));
  CHECK(std::abs(mean(s.view())) < 1e-10);
  CHECK(population_std(s.view()) == doctest::Approx(1.0).epsilon(1e-10));
  const Segment again = standardize(s);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(again[i] == doctest::Approx(s[i]).epsilon(1e-10));
  const Segment flipped = standardize(s.scaled(-3.0));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(flipped[i] == doctest::Approx(-s[i]).epsilon(1e-10));
}

TEST_CASE("normalize_pair and denormalize") {
  const auto p = normalize_pair(Segment({2, 2}, 1), Segment({0, 4}, 1));
  CHECK(p.record.sigma_y == 2.0);
  CHECK(p.x_hat.samples() == std::vector<double>{1, 1});
  CHECK(p.y_hat.samples() == std::vector<double>{0, 2});
  CHECK_THROWS_AS(normalize_pair(Segment({1, 2}, 1), Segment({5, 5}, 1)), DegenerateSignal);

  CHECK(denormalize(Segment({1, -1}, 1), {2.0}).samples() == std::vector<double>{2, -2});
  CHECK(denormalize(Segment({1, -1}, 1), {1.0}).samples() == std::vector<double>{1, -1});

  const Segment x = noise(64, 3), y = noise(64, 4);
  const auto q = normalize_pair(x, y);
  const Segment back = denormalize(q.x_hat, q.record);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
}
