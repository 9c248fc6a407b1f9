// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "cohten/coherence.hpp"
#include "cohten/tensor.hpp"

namespace cohten {

/// One sufficient-condition test. `holds` is always consistent with
/// comparing lhs against rhs in the check's direction; `margin` is positive
/// when the check holds with room to spare, negative when it fails, and can
/// be +infinity when a coherence of zero makes the condition vacuous.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double margin = 0.0;
};

/// Factor-wise Kruskal condition: krank_u + krank_v + krank_w >= 2r + 2.
/// Passing it certifies the expansion is the unique rank-r one up to
/// permutation and scaling of the factor columns.
Check check_kruskal(int krank_u, int krank_v, int krank_w, int r);

/// Coherence form of the Kruskal condition:
/// (1/mu_u + 1/mu_v + 1/mu_w)/2 > r, strict. A zero coherence contributes
/// an infinite term, so the check holds with infinite margin.
Check check_coherence_kruskal(double mu_u, double mu_v, double mu_w, int r);

/// Existence of a best bounded-coherence approximation:
/// mu_u * mu_v * mu_w < 1/r, strict.
Check check_existence_bound(double mu_u, double mu_v, double mu_w, int r);

/// Combined existence + uniqueness condition:
/// 1/cbrt(mu_u * mu_v * mu_w) > (2/3) r, strict.
Check check_corollary(double mu_u, double mu_v, double mu_w, int r);

/// Sparse-recovery bound via spark: spark/2 >= k for sparsity level k.
/// `spark_value` may be kInfiniteSpark.
Check check_spark_recovery(int spark_value, int k);

/// Sparse-recovery bound via coherence: (1 + 1/mu)/2 >= k. Never holds on
/// data where the spark form fails, since spark >= 1 + 1/mu.
Check check_coherence_recovery(double mu, int k);

struct CertifyOptions {
  double tol = 1e-9;          // singular value tolerance for exact kranks
  double lambda_min = 1e-12;  // weights at or below this count as zero
};

/// Existence/uniqueness certificate for a CP model.
struct Certificate {
  int r = 0;
  double mu_u = 0.0, mu_v = 0.0, mu_w = 0.0;
  int krank_u = 0, krank_v = 0, krank_w = 0;
  /// True when kranks come from exhaustive spark search; false when the
  /// rank exceeds the search limit and the clamped coherence lower bound
  /// min(r, ceil(1/mu)) is substituted.
  bool krank_exact = true;
  /// True when every weight magnitude exceeds lambda_min; the uniqueness
  /// conditions assume no vanishing terms.
  bool weights_ok = true;
  std::vector<Check> checks;
  /// weights_ok and the coherence Kruskal condition both pass: r is the
  /// rank of the evaluated tensor and the expansion is essentially unique.
  bool rank_certified = false;

  const Check& check(const std::string& name) const;
};

Certificate certify_model(const CpModel& m, const CertifyOptions& opts = {});

}  // namespace cohten
