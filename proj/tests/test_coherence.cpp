// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "cohten/coherence.hpp"
#include "cohten/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cohten;

namespace {
Eigen::MatrixXcd cols2(std::initializer_list<cx> a,
                       std::initializer_list<cx> b) {
  Eigen::MatrixXcd m(static_cast<int>(a.size()), 2);
  int i = 0;
  for (cx z : a) m(i++, 0) = z;
  i = 0;
  for (cx z : b) m(i++, 1) = z;
  return m;
}
}  // namespace

TEST_CASE("ColumnSet enforces unit columns; normalized() rescales") {
  Eigen::MatrixXcd bad(2, 1);
  bad << cx(3, 0), cx(4, 0);
  CHECK_THROWS_AS(ColumnSet{bad}, domain_error);
  ColumnSet cs = ColumnSet::normalized(bad);
  CHECK(cs.dim() == 2);
  CHECK(cs.count() == 1);
  CHECK(std::abs(cs.columns()(0, 0) - cx(0.6, 0)) <= 1e-15);
  CHECK_THROWS_AS(ColumnSet::normalized(Eigen::MatrixXcd::Zero(2, 1)),
                  domain_error);
  CHECK_THROWS_AS(ColumnSet{Eigen::MatrixXcd(0, 0)}, dimension_error);
}

TEST_CASE("coherence is the largest pairwise inner-product magnitude") {
  CHECK(coherence(ColumnSet(Eigen::MatrixXcd::Identity(3, 3))) == 0.0);
  Eigen::VectorXcd single(2);
  single << cx(1, 0), cx(0, 0);
  CHECK(coherence(ColumnSet(single)) == 0.0);

  double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m = cols2({cx(1, 0), cx(0, 0)}, {cx(s, 0), cx(s, 0)});
  CHECK(coherence(ColumnSet(m)) == doctest::Approx(s).epsilon(1e-14));

  // A phase on one column must not change the magnitude.
  m.col(1) *= cx(0, 1);
  CHECK(coherence(ColumnSet(m)) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("spark finds the smallest dependent subset by brute force") {
  CHECK(spark(ColumnSet(Eigen::MatrixXcd::Identity(4, 4))) == kInfiniteSpark);
  CHECK(is_infinite_spark(spark(ColumnSet(Eigen::MatrixXcd::Identity(4, 4)))));

  // Duplicated column: {1, 2} is dependent.
  Eigen::MatrixXcd dup = cols2({cx(1, 0), cx(0, 0)}, {cx(1, 0), cx(0, 0)});
  CHECK(spark(ColumnSet(dup)) == 2);

  // e1, e2, (e1+e2)/sqrt(2): any two independent, all three dependent.
  double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd tri(2, 3);
  tri << cx(1, 0), cx(0, 0), cx(s, 0), cx(0, 0), cx(1, 0), cx(s, 0);
  CHECK(spark(ColumnSet(tri)) == 3);
  CHECK(krank(ColumnSet(tri)) == 2);
}

TEST_CASE("spark treats near-dependence below tol as dependence") {
  Eigen::MatrixXcd m(2, 2);
  m.col(0) << cx(1, 0), cx(0, 0);
  Eigen::VectorXcd v(2);
  v << cx(1, 0), cx(1e-12, 0);
  m.col(1) = v / v.norm();
  // The pair's singular value ratio is ~1e-12, under the 1e-9 default.
  CHECK(spark(ColumnSet(m)) == 2);
  // With a tighter tolerance the pair counts as independent.
  CHECK(spark(ColumnSet(m), 1e-14) == kInfiniteSpark);
  CHECK_THROWS_AS(spark(ColumnSet(m), -1.0), domain_error);
}

TEST_CASE("spark rejects collections beyond the exhaustive-search limit") {
  std::mt19937_64 rng(3);
  ColumnSet big(random_unit_columns(rng, 4, 25));
  CHECK_THROWS_AS(spark(big), capacity_error);
  CHECK(coherence(big) > 0.0);  // coherence has no such limit
}

TEST_CASE("krank is spark-1 when finite, the column count otherwise") {
  CHECK(krank(ColumnSet(Eigen::MatrixXcd::Identity(3, 3))) == 3);
  Eigen::MatrixXcd dup = cols2({cx(1, 0), cx(0, 0)}, {cx(1, 0), cx(0, 0)});
  CHECK(krank(ColumnSet(dup)) == 1);
}

TEST_CASE("analyze_columns reports consistent mu, spark, krank, girth") {
  for (int t = 0; t < 40; ++t) {
    std::mt19937_64 rng(mix_seed(90, t));
    std::uniform_int_distribution<int> dim(1, 6), cnt(1, 6);
    int m = dim(rng), r = cnt(rng);
    ColumnSet cs(random_unit_columns(rng, m, r));
    CoherenceReport rep = analyze_columns(cs);
    CHECK(rep.mu >= 0.0);
    CHECK(rep.mu <= 1.0 + 1e-12);
    CHECK(rep.girth == rep.spark);
    if (is_infinite_spark(rep.spark)) {
      CHECK(rep.krank == cs.count());
    } else {
      CHECK(rep.spark >= 2);
      CHECK(rep.krank == rep.spark - 1);
    }
    CHECK(rep.spark == spark(cs));
    CHECK(rep.mu == coherence(cs));
  }
}

TEST_CASE("coherence lower-bounds spark and krank on random data") {
  for (int t = 0; t < 60; ++t) {
    std::mt19937_64 rng(mix_seed(91, t));
    std::uniform_int_distribution<int> dim(1, 6), cnt(2, 6);
    int m = dim(rng), r = cnt(rng);
    ColumnSet cs(random_unit_columns(rng, m, r));
    CoherenceReport rep = analyze_columns(cs);
    REQUIRE(rep.mu > 0.0);  // random columns are never exactly orthogonal
    double spark_val = is_infinite_spark(rep.spark)
                           ? std::numeric_limits<double>::infinity()
                           : rep.spark;
    CHECK(spark_val >= 1.0 + 1.0 / rep.mu - 1e-9);
    CHECK(rep.krank >= std::min<double>(cs.count(), 1.0 / rep.mu) - 1e-9);
  }
}

TEST_CASE("spark_coherence_bounds matches its closed form") {
  SparkBounds b = spark_coherence_bounds(0.5);
  CHECK(b.spark_lb == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(b.krank_lb == doctest::Approx(2.0).epsilon(1e-15));
  SparkBounds unit = spark_coherence_bounds(1.0);
  CHECK(unit.spark_lb == doctest::Approx(2.0).epsilon(1e-15));
  SparkBounds zero = spark_coherence_bounds(0.0);
  CHECK(std::isinf(zero.spark_lb));
  CHECK(std::isinf(zero.krank_lb));
  CHECK_THROWS_AS(spark_coherence_bounds(-0.1), domain_error);
  CHECK_THROWS_AS(spark_coherence_bounds(1.5), domain_error);
}
