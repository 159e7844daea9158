#include <doctest.h>

#include <cmath>
#include <vector>

#include "qvpn/errors.hpp"
#include "qvpn/random.hpp"
#include "qvpn/stats.hpp"

using namespace qvpn;

TEST_CASE("pearson on exact relations") {
  std::vector<double> x{1, 2, 3, 4, 5, 6}, up, down;
  for (double v : x) {
    up.push_back(2 * v + 1);
    down.push_back(-v);
  }
  CHECK(pearson(x, up) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, down) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("pearson five-point hand computation") {
  // means 3 and 4; Sxy = 6, Sxx = 10, Syy = 6
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 5, 4, 5};
  CHECK(std::abs(pearson(x, y) - std::sqrt(0.6)) < 1e-12);
}

TEST_CASE("pearson degenerate inputs") {
  const std::vector<double> a{1, 2, 3};
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), ValidationError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{4, 4, 4}), ValidationError);
}

TEST_CASE("mean") { CHECK(mean(std::vector<double>{1, 2, 6}) == 3.0); }

TEST_CASE("ks statistic") {
  CHECK(ks_statistic_uniform(std::vector<double>{0.5}, 0, 1) == doctest::Approx(0.5));
  CHECK(ks_statistic_uniform(std::vector<double>{0.25, 0.75}, 0, 1) == doctest::Approx(0.25));
  CHECK(ks_critical_value(0.05, 100) == doctest::Approx(0.1358).epsilon(1e-3));
  Rng rng(3);
  std::vector<double> u, skew;
  for (int i = 0; i < 5000; ++i) {
    u.push_back(rng.uniform(2, 5));
    skew.push_back(2 + 3 * std::pow(rng.canonical(), 2));
  }
  CHECK(ks_statistic_uniform(u, 2, 5) < ks_critical_value(0.01, u.size()));
  CHECK(ks_statistic_uniform(skew, 2, 5) > ks_critical_value(0.01, skew.size()));
}
