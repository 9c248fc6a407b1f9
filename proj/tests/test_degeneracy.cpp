// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdint>
#include <optional>

#include "cohten/degeneracy.hpp"
#include "cohten/tensor.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cohten;

namespace {

double expected_gap(double n) {
  return std::sqrt(3.0 / (n * n) + 1.0 / (n * n * n * n));
}

}  // namespace

TEST_CASE("the orthonormal instance and its limit tensor") {
  DslInstance inst = DslInstance::orthonormal(2);
  CHECK_NOTHROW(validate_instance(inst));
  Tensor3 a = dsl_limit(inst);
  REQUIRE(a.dim0() == 2);
  // A = e1 e1 e2 + e1 e2 e1 + e2 e1 e1.
  CHECK(std::abs(a(0, 0, 1) - cx(1, 0)) <= 1e-15);
  CHECK(std::abs(a(0, 1, 0) - cx(1, 0)) <= 1e-15);
  CHECK(std::abs(a(1, 0, 0) - cx(1, 0)) <= 1e-15);
  CHECK(std::abs(a(0, 0, 0)) <= 1e-15);
  CHECK(std::abs(a(1, 1, 1)) <= 1e-15);
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("instance validation rejects dependent pairs and bad shapes") {
  DslInstance inst = DslInstance::orthonormal(3);
  inst.v.col(1) = inst.u.col(1);  // pair 2 becomes parallel
  CHECK_THROWS_AS(validate_instance(inst), domain_error);

  DslInstance wide = DslInstance::orthonormal(2);
  wide.u.conservativeResize(2, 2);
  CHECK_THROWS_AS(validate_instance(wide), dimension_error);

  CHECK_THROWS_AS(DslInstance::orthonormal(1), dimension_error);
}

TEST_CASE("the rank-2 sequence approaches the limit at the closed-form rate") {
  DslInstance inst = DslInstance::orthonormal(2);
  Tensor3 a = dsl_limit(inst);
  for (std::int64_t n : {1LL, 2LL, 3LL, 7LL, 10LL, 100LL, 1000000LL}) {
    Tensor3 an = dsl_sequence(inst, n);
    Tensor3 diff(2, 2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) diff(i, j, k) = an(i, j, k) - a(i, j, k);
    double gap = frobenius_norm(diff);
    CHECK(gap ==
          doctest::Approx(expected_gap(static_cast<double>(n))).epsilon(1e-12));
  }
  // Specific sequence entries for n = 10: the cross terms are 1/n.
  Tensor3 a10 = dsl_sequence(inst, 10);
  CHECK(std::abs(a10(0, 0, 1) - cx(1, 0)) <= 1e-14);
  CHECK(std::abs(a10(0, 1, 1) - cx(0.1, 0)) <= 1e-15);
  CHECK(std::abs(a10(1, 1, 1) - cx(0.01, 0)) <= 1e-16);
  CHECK_THROWS_AS(dsl_sequence(inst, 0), domain_error);
}

TEST_CASE("huge indices switch to the cancellation-free expansion") {
  DslInstance inst = DslInstance::orthonormal(2);
  Tensor3 a = dsl_limit(inst);
  const std::int64_t n = 2000000000;  // past the direct-formula range
  Tensor3 an = dsl_sequence(inst, n);
  Tensor3 diff(2, 2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) diff(i, j, k) = an(i, j, k) - a(i, j, k);
  double gap = frobenius_norm(diff);
  double expect = expected_gap(static_cast<double>(n));
  CHECK(std::abs(gap - expect) <= 1e-6 * expect);
}

TEST_CASE("the explicit 2-term model matches the sequence element") {
  DslInstance inst = DslInstance::orthonormal(2);
  for (std::int64_t n : {1LL, 10LL, 100LL}) {
    CpModel m = dsl_sequence_model(inst, n);
    CHECK(m.rank() == 2);
    Tensor3 an = dsl_sequence(inst, n);
    CHECK(residual(an, m) <= 1e-9 * frobenius_norm(an));
    // Weight magnitude n * (1 + 1/n^2)^(3/2), coherence 1/sqrt(1 + 1/n^2).
    double nn = static_cast<double>(n);
    double lam = nn * std::pow(1.0 + 1.0 / (nn * nn), 1.5);
    CHECK(m.lambda_max() == doctest::Approx(lam).epsilon(1e-9));
  }
  CHECK_THROWS_AS(dsl_sequence_model(inst, -3), domain_error);
}

TEST_CASE("demo_degeneracy tabulates the approach and shows the escape and "
          "its cure") {
  DslInstance inst = DslInstance::orthonormal(2);
  SolverOptions opts;
  opts.max_iter = 1500;
  opts.rel_tol = 1e-8;
  opts.restarts = 3;
  opts.seed = 11;
  std::array<double, 3> caps = {0.79, 0.79, 0.79};
  DegeneracyReport rep =
      demo_degeneracy(inst, {1, 10, 100}, opts, caps);

  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].n == 1);
  CHECK(rep.rows[1].dist_to_limit ==
        doctest::Approx(expected_gap(10.0)).epsilon(1e-12));
  CHECK(rep.rows[2].lambda_max_explicit ==
        doctest::Approx(100.0 * std::pow(1.0001, 1.5)).epsilon(1e-12));
  CHECK(rep.rows[2].mu_u ==
        doctest::Approx(1.0 / std::sqrt(1.0001)).epsilon(1e-12));

  // Unconstrained rank-2 fits walk off to infinity: the weight explosion
  // detector must fire, with a large growth over the iteration-10 weight.
  CHECK(rep.unconstrained.trace.status == SolveStatus::diverging_weights);
  const auto& iters = rep.unconstrained.trace.iterations;
  REQUIRE(iters.size() > 11);
  double lam10 = iters[10].lambda_max;
  CHECK(iters.back().lambda_max > 10.0 * lam10);

  // Capped at 0.79 per mode, the same fit settles: bounded weights and a
  // genuine residual floor.
  REQUIRE(rep.constrained.has_value());
  CHECK(rep.constrained->trace.status == SolveStatus::converged);
  CHECK(rep.constrained->trace.feasible);
  CHECK(rep.constrained->model.lambda_max() <= 100.0);
  double limit_norm = frobenius_norm(dsl_limit(inst));
  double res = residual(dsl_limit(inst), rep.constrained->model);
  CHECK(res > 0.01 * limit_norm);

  CHECK_THROWS_AS(demo_degeneracy(inst, {}, opts, caps), domain_error);
}
