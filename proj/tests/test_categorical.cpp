#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "btai/categorical.hpp"

using namespace btai;

TEST_CASE("softmax of a constant vector is uniform") {
  auto out = softmax({4.2, 4.2, 4.2}, 3.0);
  for (double p : out.probs) CHECK(p == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("softmax preserves the argmax and saturates at high precision") {
  auto out = softmax({2.0, 1.0}, 100.0);
  CHECK(out.argmax() == 0);
  CHECK(out[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(out[1] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("softmax matches the arbitrary-precision reference") {
  // exp(3 v_i) / sum_j exp(3 v_j) for v = [10, 9, ..., 1], evaluated at
  // 50-digit precision and frozen here.
  const std::vector<double> expected = {
      0.95021293163222497436, 0.04730831619120201149, 0.0023553423725798992776,
      0.00011726559173336231301, 5.8383100328269302974e-6,
      2.9067234075714035996e-7, 1.4471723701922791973e-8,
      7.2050469734846711739e-10, 3.5871816626255250971e-11,
      1.7859525868508486714e-12};
  std::vector<double> v;
  for (int i = 10; i >= 1; --i) v.push_back(i);
  auto out = softmax(v, 3.0);
  REQUIRE(out.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(out[i] == Catch::Approx(expected[i]).margin(1e-12));
}

TEST_CASE("softmax rejects bad input") {
  CHECK_THROWS_AS(softmax({1.0, std::nan("")}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax({1.0, 2.0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax({}, 1.0), std::invalid_argument);
}

TEST_CASE("softmax sums to one for random inputs and precisions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-50.0, 50.0);
  std::uniform_real_distribution<double> prec(1e-6, 1e4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 12);
    for (double& x : v) x = val(rng);
    auto out = softmax(v, prec(rng));
    double sum = 0.0;
    for (double p : out.probs) sum += p;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("kl divergence identities") {
  Categorical p({0.3, 0.2, 0.5});
  CHECK(kl_divergence(p, p) == Catch::Approx(0.0).margin(1e-15));

  // One-hot against uniform over n elements is ln n.
  auto hot = one_hot(1, 3);
  auto uni = uniform(3);
  CHECK(kl_divergence(hot, uni) == Catch::Approx(std::log(3.0)).margin(1e-12));
}

TEST_CASE("kl divergence matches the summation reference") {
  // sum p_i ln(p_i / q_i) for ([0.7, 0.3], [0.5, 0.5]) at 50 digits.
  Categorical p({0.7, 0.3}), q({0.5, 0.5});
  CHECK(kl_divergence(p, q) ==
        Catch::Approx(0.08228287850505184639156).margin(1e-12));
  CHECK_THROWS_AS(kl_divergence(p, Categorical({1.0})), std::invalid_argument);
}

TEST_CASE("kl divergence is nonnegative and zero only at equality") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> pv(n), qv(n);
    double ps = 0, qs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pv[i] = unit(rng);
      qv[i] = unit(rng);
      ps += pv[i];
      qs += qv[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      pv[i] /= ps;
      qv[i] /= qs;
    }
    const double kl = kl_divergence(Categorical(pv), Categorical(qv));
    CHECK(kl >= -1e-12);
    const double self = kl_divergence(Categorical(pv), Categorical(pv));
    CHECK(self == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("entropy endpoints") {
  CHECK(entropy(uniform(5)) == Catch::Approx(std::log(5.0)).margin(1e-12));
  CHECK(entropy(one_hot(2, 5)) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("entropy is bounded by ln n with equality only at uniform") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> pv(n);
    double ps = 0;
    for (double& x : pv) {
      x = unit(rng);
      ps += x;
    }
    for (double& x : pv) x /= ps;
    CHECK(entropy(Categorical(pv)) <= std::log(double(n)) + 1e-12);
  }
}

TEST_CASE("likelihood columns built from the same rotation share entropy") {
  // Each column permutes the same values, so the entropies coincide.
  const std::vector<std::vector<double>> cols = {
      {0.05, 0.05, 0.9}, {0.05, 0.9, 0.05}, {0.9, 0.05, 0.05}};
  const double expected = 0.39439769144744277045;  // 50-digit reference
  for (const auto& col : cols)
    CHECK(entropy(Categorical(col)) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("one_hot layout") {
  auto first = one_hot(0, 10);
  CHECK(first[0] == 1.0);
  for (std::size_t i = 1; i < 10; ++i) CHECK(first[i] == 0.0);
  auto last = one_hot(9, 10);
  CHECK(last[9] == 1.0);
  CHECK(one_hot(0, 1).size() == 1);
  CHECK(one_hot(0, 1)[0] == 1.0);
  CHECK_THROWS_AS(one_hot(10, 10), std::invalid_argument);
}
