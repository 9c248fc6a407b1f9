// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohten/tensor.hpp"

namespace cohten {

struct SolverOptions {
  int r = 1;
  /// Per-mode coherence caps in (0, 1]. Empty: unconstrained.
  std::optional<std::array<double, 3>> mu_caps;
  int max_iter = 2000;
  /// Stop when the per-sweep residual change, relative to the input norm,
  /// drops below this while the largest weight is stable.
  double rel_tol = 1e-8;
  /// Initial weight of the quadratic coherence hinge penalty.
  double penalty_weight = 1.0;
  /// Weight multiplier applied after every sweep that ends infeasible.
  double penalty_growth = 2.0;
  int restarts = 5;
  std::uint64_t seed = 0;
};

enum class SolveStatus { converged, max_iter, diverging_weights };

const char* to_string(SolveStatus s);

struct IterRecord {
  int iter = 0;          // 0 is the random initialization
  double residual = 0.0; // Frobenius distance to the input tensor
  double lambda_max = 0.0;
  double mu_u = 0.0, mu_v = 0.0, mu_w = 0.0;
};

struct SolveTrace {
  std::vector<IterRecord> iterations;
  SolveStatus status = SolveStatus::max_iter;
  int restart_index = 0;
  /// Constrained runs: final model satisfies every cap within 1e-6.
  bool feasible = true;
  std::vector<std::string> notes;
};

struct SolveResult {
  CpModel model;
  SolveTrace trace;
};

/// Constrained solve found no run satisfying the caps; carries the trace of
/// the best (lowest residual) infeasible attempt for diagnosis.
class infeasible_error : public error {
 public:
  infeasible_error(const std::string& msg, SolveTrace best)
      : error(msg), best_trace_(std::move(best)) {}
  const SolveTrace& best_trace() const { return best_trace_; }

 private:
  SolveTrace best_trace_;
};

/// Alternating least squares CP decomposition. Runs opts.restarts
/// independent seeded starts and returns the lowest-residual one (ties go
/// to the lowest restart index). Deterministic for a fixed seed. Requires
/// opts.mu_caps to be empty, a nonzero tensor, and r no larger than the
/// smallest product of two mode dimensions.
///
/// The per-sweep residual sequence is non-increasing: each mode update is
/// an exact least-squares solve, and the extrapolated candidates that
/// accelerate sweeps are kept only when they fit strictly better. status
/// diverging_weights reports the rank-deficiency escape: the largest
/// weight grew by 10x over a 500-sweep window while the residual
/// improvement over that window fell under 1e-6 of the input norm, the
/// signature of an input whose best rank-r approximation does not exist.
SolveResult als_decompose(const Tensor3& a, const SolverOptions& opts);

/// ALS with per-mode coherence caps. Sweeps fit each mode by least squares,
/// then push the mode's columns back toward the feasible set by descending
/// fit + weight * sum_{p<q} max(0, |<x_p,x_q>| - cap)^2; the weight is
/// multiplied by penalty_growth after every sweep that ends infeasible.
/// Feasible restarts compete by residual; if none is feasible within 1e-6,
/// throws infeasible_error.
SolveResult constrained_decompose(const Tensor3& a, const SolverOptions& opts);

/// Greedy matching between two models of equal rank and shape.
struct AlignResult {
  /// permutation[q] = index of m's term matched to reference term q.
  std::vector<int> permutation;
  /// Per reference term: phase rotations for the three factor columns,
  /// wrapped to (-pi, pi] after removing the common part so each triple
  /// sums to 0 (mod 2*pi).
  std::vector<std::array<double, 3>> phases;
  /// Per-mode score: min over matched terms of |<column, column'>|.
  double score_u = 0.0, score_v = 0.0, score_w = 0.0;
  double score() const;
};

/// Matches terms greedily by the product of per-mode inner-product
/// magnitudes; equal scores resolve to the smallest reference index, then
/// the smallest model index.
AlignResult align_models(const CpModel& m, const CpModel& reference);

/// Number of worker threads the solver may use: the COHTEN_THREADS
/// environment variable when set (clamped to >= 1), otherwise all cores.
int solver_thread_count();

}  // namespace cohten
