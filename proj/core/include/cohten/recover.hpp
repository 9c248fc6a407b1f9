// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cohten/array_model.hpp"
#include "cohten/tensor.hpp"

namespace cohten {

enum class RecoveryFlag {
  /// Some translation is long enough that inter-subarray phases can wrap:
  /// |delta| * omega / c >= pi. Estimates are returned but may be wrong.
  aliased,
  /// Translations span fewer than 3 dimensions; directions are recovered
  /// only within that span (minimum-norm solution).
  subspace_restricted,
  /// No usable direction information (zero phases or no phase reference).
  unresolved,
};

const char* to_string(RecoveryFlag f);

struct SourceRecovery {
  /// Estimated unit direction; empty when unresolved.
  std::optional<Eigen::Vector3d> direction;
  /// Angle to the true direction, degrees; set when truth is available and
  /// the direction was resolved.
  std::optional<double> direction_error_deg;
  /// Weight-scaled waveform estimate lambda_p * w_p. The overall scale and
  /// phase per source are not identifiable from the tensor alone.
  Eigen::VectorXcd waveform;
  /// |<w_est, w_true>| on unit columns, in [0, 1]; set when truth is given.
  std::optional<double> rho;
  std::vector<RecoveryFlag> flags;
};

struct RecoveryResult {
  /// One entry per source: in reference order when truth was supplied,
  /// otherwise in model column order.
  std::vector<SourceRecovery> sources;
  /// permutation[q] = model term assigned to output slot q.
  std::vector<int> permutation;
};

/// Direction of arrival per model term from the subarray-gain factor:
/// phases are read relative to subarray 1 (assuming each lies in
/// (-pi, pi]), converted to path-length differences, and fit by ordinary
/// least squares against the translations.
RecoveryResult estimate_directions(
    const CpModel& m, const std::vector<Eigen::Vector3d>& translations,
    double omega, double celerity);

/// Waveform estimates per term. With a reference model, terms are aligned
/// first and per-source correlation magnitudes are reported.
RecoveryResult extract_waveforms(const CpModel& m,
                                 const CpModel* reference = nullptr);

/// Directions + waveforms + errors against the scenario ground truth when
/// available.
RecoveryResult recover_sources(const CpModel& m, const ArrayScenario& scn,
                               const GroundTruth* truth = nullptr);

}  // namespace cohten
