// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>

#include "cohten/certify.hpp"
#include "cohten/coherence.hpp"
#include "cohten/solve.hpp"
#include "cohten/tensor.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cohten;

namespace {

SolverOptions base_opts(int r, std::uint64_t seed) {
  SolverOptions o;
  o.r = r;
  o.seed = seed;
  o.max_iter = 600;
  o.rel_tol = 1e-10;
  o.restarts = 4;
  return o;
}

}  // namespace

TEST_CASE("als_decompose recovers an exact low-rank tensor") {
  CpModel truth = testutil::low_coherence_model(321, 4, 2, 0.6);
  Tensor3 a = cp_evaluate(truth);
  SolveResult res = als_decompose(a, base_opts(2, 99));
  CHECK(res.trace.status == SolveStatus::converged);
  CHECK(residual(a, res.model) <= 1e-6 * frobenius_norm(a));
  AlignResult align = align_models(res.model, truth);
  CHECK(align.score() >= 0.999);
  CHECK(res.trace.feasible);
  CHECK(res.trace.iterations.size() >= 2);
}

TEST_CASE("the recorded residual sequence never increases") {
  std::mt19937_64 rng(5);
  Tensor3 a(3, 4, 5);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  SolveResult res = als_decompose(a, base_opts(2, 17));
  double norm = frobenius_norm(a);
  const auto& it = res.trace.iterations;
  REQUIRE(it.size() >= 2);
  CHECK(it[0].iter == 0);
  for (std::size_t i = 1; i < it.size(); ++i) {
    CHECK(it[i].iter == static_cast<int>(i));
    CHECK(it[i].residual <= it[i - 1].residual + 1e-12 * norm);
  }
}

TEST_CASE("als_decompose is deterministic for a fixed seed") {
  std::mt19937_64 rng(6);
  Tensor3 a(3, 3, 4);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  SolveResult r1 = als_decompose(a, base_opts(2, 123));
  SolveResult r2 = als_decompose(a, base_opts(2, 123));
  CHECK(r1.model.lambda() == r2.model.lambda());
  CHECK(r1.model.u() == r2.model.u());
  CHECK(r1.model.v() == r2.model.v());
  CHECK(r1.model.w() == r2.model.w());
  CHECK(r1.trace.iterations.size() == r2.trace.iterations.size());
  CHECK(r1.trace.restart_index == r2.trace.restart_index);

  SolveResult r3 = als_decompose(a, base_opts(2, 124));
  CHECK(r3.model.lambda() != r1.model.lambda());  // seed actually matters
}

TEST_CASE("solver input validation") {
  Tensor3 zero(2, 2, 2);
  SolverOptions o = base_opts(1, 0);
  CHECK_THROWS_AS(als_decompose(zero, o), domain_error);

  std::mt19937_64 rng(7);
  Tensor3 a(2, 2, 2);
  for (auto& z : a.data()) z = complex_gaussian(rng);

  SolverOptions bad = o;
  bad.r = 0;
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);
  bad = o;
  bad.r = 5;  // exceeds the smallest two-mode dimension product (4)
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);
  bad = o;
  bad.max_iter = 0;
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);
  bad = o;
  bad.restarts = 0;
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);
  bad = o;
  bad.rel_tol = -1.0;
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);

  // Each entry point insists on the matching mode.
  bad = o;
  bad.mu_caps = {{0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(als_decompose(a, bad), domain_error);
  CHECK_THROWS_AS(constrained_decompose(a, o), domain_error);
  bad.mu_caps = {{0.0, 0.5, 0.5}};
  CHECK_THROWS_AS(constrained_decompose(a, bad), domain_error);
  bad.mu_caps = {{0.5, 1.5, 0.5}};
  CHECK_THROWS_AS(constrained_decompose(a, bad), domain_error);
}

TEST_CASE("caps of 1.0 reproduce the unconstrained solve exactly") {
  std::mt19937_64 rng(8);
  Tensor3 a(3, 3, 3);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  SolverOptions o = base_opts(2, 55);
  SolveResult plain = als_decompose(a, o);
  SolverOptions capped = o;
  capped.mu_caps = {{1.0, 1.0, 1.0}};
  SolveResult hinged = constrained_decompose(a, capped);
  // The hinge never activates, so the trajectories coincide bit for bit.
  CHECK(plain.model.lambda() == hinged.model.lambda());
  CHECK(plain.model.u() == hinged.model.u());
  CHECK(plain.model.v() == hinged.model.v());
  CHECK(plain.model.w() == hinged.model.w());
  CHECK(plain.trace.iterations.size() == hinged.trace.iterations.size());
  CHECK(plain.trace.status == hinged.trace.status);
  CHECK(hinged.trace.feasible);
}

TEST_CASE("constrained_decompose enforces the caps it is given") {
  CpModel truth = testutil::random_model(31, 4, 4, 4, 3);
  Tensor3 a = cp_evaluate(truth);
  SolverOptions o = base_opts(3, 77);
  o.mu_caps = {{0.5, 0.55, 0.6}};
  SolveResult res = constrained_decompose(a, o);
  CHECK(res.trace.feasible);
  CHECK(coherence(ColumnSet(res.model.u())) <= 0.5 + 1e-6);
  CHECK(coherence(ColumnSet(res.model.v())) <= 0.55 + 1e-6);
  CHECK(coherence(ColumnSet(res.model.w())) <= 0.6 + 1e-6);

  // Bounded-weight guarantee: with the cap product under 1/r, the weight
  // norm is controlled by the input norm plus the residual.
  double prod = 0.5 * 0.55 * 0.6;
  REQUIRE(3.0 * prod < 1.0);
  double bound = (frobenius_norm(a) + residual(a, res.model)) /
                 std::sqrt(1.0 - 3.0 * prod);
  CHECK(res.model.lambda().norm() <= bound * (1.0 + 1e-9));
}

TEST_CASE("constrained_decompose throws when the caps are unreachable") {
  // Three unit vectors in C^2 always have pairwise coherence >= 1/2
  // (Welch), so caps of 0.3 on a 2x2x2 rank-3 solve cannot be met.
  std::mt19937_64 rng(9);
  Tensor3 a(2, 2, 2);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  SolverOptions o = base_opts(3, 5);
  o.max_iter = 60;
  o.restarts = 2;
  o.mu_caps = {{0.3, 0.3, 0.3}};
  bool threw = false;
  try {
    constrained_decompose(a, o);
  } catch (const infeasible_error& e) {
    threw = true;
    CHECK_FALSE(e.best_trace().feasible);
    CHECK_FALSE(e.best_trace().iterations.empty());
  }
  CHECK(threw);
}

TEST_CASE("a loose cap product triggers the existence warning note") {
  std::mt19937_64 rng(10);
  Tensor3 a(3, 3, 3);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  SolverOptions o = base_opts(2, 66);
  o.mu_caps = {{0.9, 0.9, 0.9}};  // 2 * 0.729 >= 1
  SolveResult res = constrained_decompose(a, o);
  bool warned = false;
  for (const std::string& n : res.trace.notes)
    if (n.find("cap") != std::string::npos) warned = true;
  CHECK(warned);

  SolverOptions tight = o;
  tight.mu_caps = {{0.5, 0.5, 0.5}};  // 2 * 0.125 < 1: no warning
  SolveResult ok = constrained_decompose(a, tight);
  CHECK(ok.trace.notes.empty());
}

TEST_CASE("align_models inverts a permuted, phase-rotated copy") {
  CpModel base = testutil::low_coherence_model(12, 4, 3, 0.7);
  const int perm[3] = {2, 0, 1};  // column q of the copy = base column perm[q]
  const double th_u[3] = {0.3, -1.1, 2.0};
  const double th_v[3] = {0.7, 0.2, -2.5};
  Eigen::VectorXcd lambda(3);
  Eigen::MatrixXcd u(4, 3), v(4, 3), w(4, 3);
  for (int q = 0; q < 3; ++q) {
    // Distribute the phase over two modes and cancel it in the weight so
    // the copy evaluates to the same tensor.
    u.col(q) = base.u().col(perm[q]) * std::polar(1.0, th_u[q]);
    v.col(q) = base.v().col(perm[q]) * std::polar(1.0, th_v[q]);
    w.col(q) = base.w().col(perm[q]);
    lambda(q) =
        base.lambda()(perm[q]) * std::polar(1.0, -(th_u[q] + th_v[q]));
  }
  CpModel copy(lambda, u, v, w);
  CHECK(residual(cp_evaluate(base), copy) <=
        1e-12 * frobenius_norm(cp_evaluate(base)));

  AlignResult align = align_models(copy, base);
  CHECK(align.score() >= 1.0 - 1e-12);
  CHECK(align.score_u >= 1.0 - 1e-12);
  REQUIRE(align.permutation.size() == 3);
  for (int q = 0; q < 3; ++q) {
    // Reference term q was built into the copy at the position p with
    // perm[p] == q, so the match must point there.
    CHECK(perm[align.permutation[q]] == q);
    // Matched weights agree in magnitude.
    CHECK(std::abs(std::abs(copy.lambda()(align.permutation[q])) -
                   std::abs(base.lambda()(q))) <= 1e-12);
    // Reported phase triples cancel (sum to 0 mod 2*pi).
    double s = align.phases[q][0] + align.phases[q][1] + align.phases[q][2];
    CHECK(std::cos(s) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("solve status strings are stable") {
  CHECK(std::string(to_string(SolveStatus::converged)) == "converged");
  CHECK(std::string(to_string(SolveStatus::max_iter)) == "max_iter");
  CHECK(std::string(to_string(SolveStatus::diverging_weights)) ==
        "diverging_weights");
}

TEST_CASE("solver_thread_count honors the environment override") {
  char saved[64] = {0};
  const char* old = std::getenv("COHTEN_THREADS");
  if (old) std::snprintf(saved, sizeof saved, "%s", old);

  ::setenv("COHTEN_THREADS", "3", 1);
  CHECK(solver_thread_count() == 3);
  ::setenv("COHTEN_THREADS", "not-a-number", 1);
  CHECK(solver_thread_count() >= 1);
  ::setenv("COHTEN_THREADS", "0", 1);
  CHECK(solver_thread_count() >= 1);

  if (old)
    ::setenv("COHTEN_THREADS", saved, 1);
  else
    ::unsetenv("COHTEN_THREADS");
}
