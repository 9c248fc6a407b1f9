// SPDX-License-Identifier: Apache-2.0
#include "cohten/recover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cohten/solve.hpp"

namespace cohten {

namespace {

constexpr double kPhaseRefFloor = 1e-12;  // |v_1| below this: no reference
constexpr double kZeroSolutionFloor = 1e-9;

struct DirectionFit {
  std::optional<Eigen::Vector3d> direction;
  std::vector<RecoveryFlag> flags;
};

DirectionFit fit_direction(const Eigen::VectorXcd& v,
                           const Eigen::MatrixXd& deltas, bool aliased,
                           bool rank_deficient, double omega,
                           double celerity) {
  DirectionFit out;
  if (aliased) out.flags.push_back(RecoveryFlag::aliased);
  if (rank_deficient) out.flags.push_back(RecoveryFlag::subspace_restricted);

  if (std::abs(v(0)) < kPhaseRefFloor) {
    out.flags.push_back(RecoveryFlag::unresolved);
    return out;
  }
  const int m = static_cast<int>(v.size());
  Eigen::VectorXd rhs(m);
  for (int j = 0; j < m; ++j) {
    rhs(j) = std::arg(v(j) * std::conj(v(0))) * celerity / omega;
  }
  // Minimum-norm least squares; the solution lives in the span of the
  // translations, which is all the data can determine.
  const Eigen::Vector3d x =
      deltas.completeOrthogonalDecomposition().solve(rhs);
  if (x.norm() < kZeroSolutionFloor) {
    out.flags.push_back(RecoveryFlag::unresolved);
    return out;
  }
  out.direction = x.normalized();
  return out;
}

}  // namespace

const char* to_string(RecoveryFlag f) {
  switch (f) {
    case RecoveryFlag::aliased: return "aliased";
    case RecoveryFlag::subspace_restricted: return "subspace_restricted";
    default: return "unresolved";
  }
}

RecoveryResult estimate_directions(
    const CpModel& m, const std::vector<Eigen::Vector3d>& translations,
    double omega, double celerity) {
  if (static_cast<int>(translations.size()) != m.dim1()) {
    throw dimension_error(
        "estimate_directions: translation count must match the second mode");
  }
  if (!(omega > 0.0) || !(celerity > 0.0)) {
    throw domain_error("estimate_directions: omega and celerity must be "
                       "positive");
  }

  const int rows = static_cast<int>(translations.size());
  Eigen::MatrixXd deltas(rows, 3);
  bool aliased = false;
  for (int j = 0; j < rows; ++j) {
    deltas.row(j) = translations[j].transpose();
    if (translations[j].norm() * omega / celerity >=
        std::numbers::pi) {
      aliased = true;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(deltas);
  const auto& sv = svd.singularValues();
  const bool rank_deficient =
      sv.size() < 3 || sv(2) <= 1e-9 * std::max(sv(0), 1e-300);

  RecoveryResult out;
  out.permutation.resize(m.rank());
  for (int p = 0; p < m.rank(); ++p) {
    out.permutation[p] = p;
    DirectionFit fit = fit_direction(m.v().col(p), deltas, aliased,
                                     rank_deficient, omega, celerity);
    SourceRecovery rec;
    rec.direction = fit.direction;
    rec.flags = std::move(fit.flags);
    out.sources.push_back(std::move(rec));
  }
  return out;
}

RecoveryResult extract_waveforms(const CpModel& m, const CpModel* reference) {
  RecoveryResult out;
  const int r = m.rank();
  if (reference == nullptr) {
    out.permutation.resize(r);
    for (int p = 0; p < r; ++p) {
      out.permutation[p] = p;
      SourceRecovery rec;
      rec.waveform = m.lambda()(p) * m.w().col(p);
      out.sources.push_back(std::move(rec));
    }
    return out;
  }

  const AlignResult align = align_models(m, *reference);
  out.permutation = align.permutation;
  for (int q = 0; q < r; ++q) {
    const int p = align.permutation[q];
    SourceRecovery rec;
    rec.waveform = m.lambda()(p) * m.w().col(p);
    const double corr =
        std::abs(cx(m.w().col(p).adjoint() * reference->w().col(q)));
    rec.rho = std::clamp(corr, 0.0, 1.0);
    out.sources.push_back(std::move(rec));
  }
  return out;
}

RecoveryResult recover_sources(const CpModel& m, const ArrayScenario& scn,
                               const GroundTruth* truth) {
  validate_scenario(scn);
  RecoveryResult directions =
      estimate_directions(m, scn.translations, scn.omega, scn.celerity);
  RecoveryResult waves =
      extract_waveforms(m, truth != nullptr ? &truth->model : nullptr);

  RecoveryResult out;
  out.permutation = waves.permutation;
  const int r = m.rank();
  for (int q = 0; q < r; ++q) {
    const int p = out.permutation[q];
    SourceRecovery rec = std::move(waves.sources[q]);
    rec.direction = directions.sources[p].direction;
    rec.flags = directions.sources[p].flags;
    if (truth != nullptr && rec.direction.has_value() &&
        q < static_cast<int>(scn.sources.size())) {
      const double c = std::clamp(
          rec.direction->dot(scn.sources[q].direction), -1.0, 1.0);
      rec.direction_error_deg =
          std::acos(c) * 180.0 / std::numbers::pi;
    }
    out.sources.push_back(std::move(rec));
  }
  return out;
}

}  // namespace cohten
