// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cohten/solve.hpp"
#include "cohten/tensor.hpp"

namespace cohten {

/// Six vectors in C^m generating the canonical rank-3 / border-rank-2
/// family: the limit tensor
///   A = u1 (x) u2 (x) v3 + u1 (x) v2 (x) u3 + v1 (x) u2 (x) u3
/// and the rank-2 sequence
///   A_n = n (u1 + v1/n) (x) (u2 + v2/n) (x) (u3 + v3/n) - n u1 (x) u2 (x) u3
/// with A_n -> A while A has no rank-2 expansion. Every pair (u_i, v_i)
/// must be linearly independent (checked to singular value 1e-9 after
/// normalizing), otherwise A would drop to rank <= 2.
struct DslInstance {
  Eigen::MatrixXcd u;  // m x 3, columns u1, u2, u3
  Eigen::MatrixXcd v;  // m x 3, columns v1, v2, v3

  /// u_i = e1, v_i = e2 in C^m (m >= 2). The closed forms are simplest
  /// here: ||A_n - A||_F = sqrt(3/n^2 + 1/n^4).
  static DslInstance orthonormal(int m = 2);
};

void validate_instance(const DslInstance& inst);

/// The limit tensor A (rank 3 exactly when the instance is valid).
Tensor3 dsl_limit(const DslInstance& inst);

/// The rank-<=2 element A_n, n >= 1. Above n = 10^9 the difference
/// expansion A + (1/n)(u1 v2 v3 + v1 u2 v3 + v1 v2 u3) + (1/n^2) v1 v2 v3
/// is used to avoid catastrophic cancellation in the defining formula.
Tensor3 dsl_sequence(const DslInstance& inst, std::int64_t n);

/// The explicit 2-term model of A_n; its weights grow like n and its
/// factor coherences approach 1 as n grows.
CpModel dsl_sequence_model(const DslInstance& inst, std::int64_t n);

struct DegeneracyRow {
  std::int64_t n = 0;
  double dist_to_limit = 0.0;
  double lambda_max_explicit = 0.0;
  double mu_u = 0.0, mu_v = 0.0, mu_w = 0.0;
};

struct DegeneracyReport {
  std::vector<DegeneracyRow> rows;
  SolveResult unconstrained;
  std::optional<SolveResult> constrained;
};

/// Tabulates the approach to the limit over n_list, then decomposes the
/// limit tensor at rank 2: unconstrained (the weights blow up), and, when
/// caps are given, coherence-capped (bounded weights, positive residual
/// floor). opts.r is forced to 2; opts.mu_caps is ignored in favor of the
/// caps argument.
DegeneracyReport demo_degeneracy(
    const DslInstance& inst, const std::vector<std::int64_t>& n_list,
    const SolverOptions& opts,
    const std::optional<std::array<double, 3>>& caps);

}  // namespace cohten
