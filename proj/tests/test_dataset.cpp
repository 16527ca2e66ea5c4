#include <doctest.h>

#include <cmath>

#include "fastpd/dataset.hpp"
#include "fastpd/errors.hpp"
#include "support/fixtures.hpp"

using namespace fastpd;
namespace ft = fastpd::testing;

TEST_CASE("load_csv on a plain table") {
  const Dataset d = load_csv("1,2\n3,4\n5,6\n");
  CHECK(d.n() == 3);
  CHECK(d.d() == 2);
  CHECK(d.at(0, 0) == 1.0);
  CHECK(d.at(2, 1) == 6.0);
  CHECK(d.column_names().empty());
  CHECK(d.column_name(1) == "f1");
}

TEST_CASE("header detection and forcing") {
  const Dataset with = load_csv("a,b\n1,2\n");
  CHECK(with.n() == 1);
  CHECK(with.column_names() == std::vector<std::string>{"a", "b"});
  CHECK(with.column_name(0) == "a");

  // All-numeric first row is data under auto detection, a header when forced.
  CHECK(load_csv("1,2\n3,4\n").n() == 2);
  const Dataset forced = load_csv("1,2\n3,4\n", HasHeader::kYes);
  CHECK(forced.n() == 1);
  CHECK(forced.column_names() == std::vector<std::string>{"1", "2"});
  CHECK_THROWS_AS(load_csv("a,b\n1,2\n", HasHeader::kNo), ValidationError);
}

TEST_CASE("load_csv errors carry the position") {
  CHECK_THROWS_WITH_AS(load_csv(""), doctest::Contains("empty table"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv("a,b\n"), doctest::Contains("empty table"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv("1,2\n3\n"), doctest::Contains("ragged row 1"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv("1,2\n3,x\n"), doctest::Contains("row 1, column 1"),
                       ValidationError);
  CHECK_THROWS_AS(load_csv("1,2\n3,inf\n"), ValidationError);
  CHECK_THROWS_AS(load_csv("1,2\nnan,4\n"), ValidationError);
}

TEST_CASE("save/load round-trip is the identity") {
  Dataset d(3, 2);
  d.at(0, 0) = 1.0 / 3.0;
  d.at(0, 1) = -0.0;
  d.at(1, 0) = 1e-300;
  d.at(1, 1) = 12345678.90123456789;
  d.at(2, 0) = -2.2250738585072014e-308;
  d.at(2, 1) = 0.1;
  d.set_column_names({"alpha", "beta"});
  const Dataset back = load_csv(save_csv(d));
  REQUIRE(back.n() == d.n());
  REQUIRE(back.d() == d.d());
  CHECK(back.column_names() == d.column_names());
  for (std::size_t r = 0; r < d.n(); ++r)
    for (std::size_t c = 0; c < d.d(); ++c) CHECK(back.at(r, c) == d.at(r, c));
}

TEST_CASE("the 2500-row four-point table loads with n=2500, d=2") {
  const Dataset table = ft::four_point_background();
  const Dataset loaded = load_csv(save_csv(table));
  CHECK(loaded.n() == 2500);
  CHECK(loaded.d() == 2);
  CHECK(loaded.values() == table.values());
}

TEST_CASE("dgp1 moments and determinism") {
  const std::size_t n = 100000;
  const auto [x, y] = generate_dgp(Dgp::kDgp1, n, 2024);
  REQUIRE(x.n() == n);
  REQUIRE(x.d() == 2);
  REQUIRE(y.size() == n);

  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m0 += x.at(i, 0);
    m1 += x.at(i, 1);
  }
  m0 /= n;
  m1 /= n;
  double v0 = 0, v1 = 0, cov = 0;
  for (std::size_t i = 0; i < n; ++i) {
    v0 += (x.at(i, 0) - m0) * (x.at(i, 0) - m0);
    v1 += (x.at(i, 1) - m1) * (x.at(i, 1) - m1);
    cov += (x.at(i, 0) - m0) * (x.at(i, 1) - m1);
  }
  v0 /= n - 1;
  v1 /= n - 1;
  cov /= n - 1;
  const double corr = cov / std::sqrt(v0 * v1);
  CHECK(std::abs(corr - 0.3) < 0.02);
  CHECK(std::abs(v0 - 1.0) < 0.05);
  CHECK(std::abs(v1 - 1.0) < 0.05);
  CHECK(std::abs(m0) < 0.02);

  // Y carries unit noise around the target.
  double resid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - dgp1_target(x.at(i, 0), x.at(i, 1));
    resid += r * r;
  }
  CHECK(std::abs(resid / n - 1.0) < 0.05);

  const auto again = generate_dgp(Dgp::kDgp1, n, 2024);
  CHECK(again.x.values() == x.values());
  CHECK(again.y == y);
  const auto other = generate_dgp(Dgp::kDgp1, n, 2025);
  CHECK(other.x.values() != x.values());
}

TEST_CASE("dgp2 covariance matches 3*I + 0.6*antidiagonal") {
  const std::size_t n = 100000;
  const auto [x, y] = generate_dgp(Dgp::kDgp2, n, 7);
  REQUIRE(x.d() == 7);
  std::vector<double> mean(7, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 7; ++j) mean[j] += x.at(i, j);
  for (double& m : mean) m /= n;
  for (std::size_t j = 0; j < 7; ++j) {
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (x.at(i, j) - mean[j]) * (x.at(i, j) - mean[j]);
    var /= n - 1;
    const double expected = j == 3 ? 3.6 : 3.0;  // the middle antidiagonal entry doubles up
    CHECK(std::abs(var - expected) < 0.1);
  }
  // Off-diagonal structure: antidiagonal pairs covary at 0.6, neighbours at 0.
  double cov06 = 0, cov01 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov06 += (x.at(i, 0) - mean[0]) * (x.at(i, 6) - mean[6]);
    cov01 += (x.at(i, 0) - mean[0]) * (x.at(i, 1) - mean[1]);
  }
  CHECK(std::abs(cov06 / (n - 1) - 0.6) < 0.1);
  CHECK(std::abs(cov01 / (n - 1)) < 0.1);
}

TEST_CASE("dgp2 widens with independent padding covariates") {
  const auto [x, y] = generate_dgp(Dgp::kDgp2, 50000, 3, 9);
  REQUIRE(x.d() == 9);
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < x.n(); ++i) mean += x.at(i, 8);
  mean /= x.n();
  for (std::size_t i = 0; i < x.n(); ++i) var += (x.at(i, 8) - mean) * (x.at(i, 8) - mean);
  CHECK(std::abs(var / (x.n() - 1) - 3.0) < 0.15);
  CHECK_THROWS_AS(generate_dgp(Dgp::kDgp2, 10, 3, 5), ValidationError);
  CHECK_THROWS_AS(generate_dgp(Dgp::kDgp1, 10, 3, 7), ValidationError);
}

TEST_CASE("generate_dgp rejects n = 0") {
  CHECK_THROWS_AS(generate_dgp(Dgp::kDgp1, 0, 1), ValidationError);
}
