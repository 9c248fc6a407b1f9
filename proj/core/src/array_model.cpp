// SPDX-License-Identifier: Apache-2.0
#include "cohten/array_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "cohten/coherence.hpp"
#include "cohten/rng.hpp"

namespace cohten {

namespace {

void check_unit_direction(const Eigen::Vector3d& d, const char* who) {
  if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-12) {
    throw domain_error(std::string(who) + ": direction must be unit norm");
  }
}

void check_wave(double omega, double celerity, const char* who) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw domain_error(std::string(who) + ": omega must be positive");
  }
  if (!(celerity > 0.0) || !std::isfinite(celerity)) {
    throw domain_error(std::string(who) + ": celerity must be positive");
  }
}

Eigen::VectorXcd make_envelope(const EnvelopeSpec& e, int snapshots,
                               std::mt19937_64& rng) {
  Eigen::VectorXcd s(snapshots);
  switch (e.kind) {
    case EnvelopeSpec::Kind::gaussian:
      for (int k = 0; k < snapshots; ++k) s(k) = complex_gaussian(rng);
      break;
    case EnvelopeSpec::Kind::sinusoid: {
      if (!std::isfinite(e.freq) || !std::isfinite(e.phase) ||
          !std::isfinite(e.amplitude) || e.amplitude == 0.0) {
        throw domain_error("envelope: sinusoid parameters must be finite "
                           "with nonzero amplitude");
      }
      for (int k = 0; k < snapshots; ++k) {
        const double t = 2.0 * std::numbers::pi * e.freq * k + e.phase;
        s(k) = e.amplitude * cx(std::cos(t), std::sin(t));
      }
      break;
    }
    case EnvelopeSpec::Kind::explicit_values: {
      if (static_cast<int>(e.values.size()) != snapshots) {
        throw domain_error("envelope: explicit values length must equal "
                           "snapshot count");
      }
      for (int k = 0; k < snapshots; ++k) {
        if (!std::isfinite(e.values[k].real()) ||
            !std::isfinite(e.values[k].imag())) {
          throw domain_error("envelope: explicit values must be finite");
        }
        s(k) = e.values[k];
      }
      break;
    }
  }
  if (s.norm() < 1e-300) {
    throw domain_error("envelope: a source envelope is identically zero");
  }
  return s;
}

}  // namespace

void validate_scenario(const ArrayScenario& scn) {
  if (scn.sensors.empty()) throw domain_error("scenario: no sensors");
  if (scn.translations.empty()) throw domain_error("scenario: no subarrays");
  if (scn.sources.empty()) throw domain_error("scenario: no sources");
  if (scn.snapshots < 1) throw domain_error("scenario: snapshots must be >= 1");
  check_wave(scn.omega, scn.celerity, "scenario");
  for (const Eigen::Vector3d& b : scn.sensors) {
    if (!b.allFinite()) throw domain_error("scenario: sensor positions must be finite");
  }
  if (scn.translations[0].norm() != 0.0) {
    throw domain_error("scenario: the first translation must be zero "
                       "(reference subarray)");
  }
  for (const Eigen::Vector3d& t : scn.translations) {
    if (!t.allFinite()) throw domain_error("scenario: translations must be finite");
  }
  for (const Source& src : scn.sources) {
    check_unit_direction(src.direction, "scenario");
    if (!is_far_field(src.range) &&
        (!(src.range > 0.0) || !std::isfinite(src.range))) {
      throw domain_error("scenario: range must be positive or far-field");
    }
  }
}

cx steering(const Eigen::Vector3d& sensor, const Eigen::Vector3d& direction,
            double range, double omega, double celerity) {
  check_unit_direction(direction, "steering");
  check_wave(omega, celerity, "steering");
  if (!sensor.allFinite()) throw domain_error("steering: sensor must be finite");
  if (!is_far_field(range) && (!(range > 0.0) || !std::isfinite(range))) {
    throw domain_error("steering: range must be positive or far-field");
  }
  double phase = sensor.dot(direction);
  if (!is_far_field(range)) {
    phase -= sensor.cross(direction).squaredNorm() / (2.0 * range);
  }
  phase *= omega / celerity;
  return cx(std::cos(phase), std::sin(phase));
}

cx subarray_gain(const Eigen::Vector3d& delta,
                 const Eigen::Vector3d& direction, double omega,
                 double celerity) {
  check_unit_direction(direction, "subarray_gain");
  check_wave(omega, celerity, "subarray_gain");
  if (!delta.allFinite()) {
    throw domain_error("subarray_gain: translation must be finite");
  }
  const double phase = (omega / celerity) * delta.dot(direction);
  return cx(std::cos(phase), std::sin(phase));
}

SynthResult synthesize(const ArrayScenario& scn, std::optional<double> snr_db,
                       std::uint64_t seed) {
  validate_scenario(scn);
  if (snr_db && !std::isfinite(*snr_db)) {
    throw domain_error("synthesize: snr_db must be finite");
  }
  const int l = static_cast<int>(scn.sensors.size());
  const int m = static_cast<int>(scn.translations.size());
  const int n = scn.snapshots;
  const int r = static_cast<int>(scn.sources.size());

  std::mt19937_64 rng(seed);

  Eigen::MatrixXcd e(l, r);  // sensor responses
  Eigen::MatrixXcd phi(m, r);
  Eigen::MatrixXcd sig(n, r);
  for (int p = 0; p < r; ++p) {
    const Source& src = scn.sources[p];
    for (int i = 0; i < l; ++i) {
      e(i, p) = steering(scn.sensors[i], src.direction, src.range, scn.omega,
                         scn.celerity);
    }
    for (int j = 0; j < m; ++j) {
      phi(j, p) =
          subarray_gain(scn.translations[j], src.direction, scn.omega,
                        scn.celerity);
    }
    sig.col(p) = make_envelope(src.envelope, n, rng);
  }

  Tensor3 t(l, m, n);
  for (int p = 0; p < r; ++p) {
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < m; ++j) {
        const cx ep = e(i, p) * phi(j, p);
        for (int k = 0; k < n; ++k) t(i, j, k) += ep * sig(k, p);
      }
    }
  }

  // Factor norms become the weights; the columns are stored unit.
  CpModel model(Eigen::VectorXcd::Ones(r), e, phi, sig);
  GroundTruth truth{model, coherence(ColumnSet(model.u())),
                    coherence(ColumnSet(model.v())),
                    coherence(ColumnSet(model.w()))};

  if (snr_db) {
    // Per-entry noise variance chosen so the expected noise power matches
    // the requested SNR; the realized ratio fluctuates around it.
    const double scale = std::pow(10.0, -*snr_db / 20.0) *
                         frobenius_norm(t) /
                         std::sqrt(static_cast<double>(t.size()));
    for (cx& z : t.data()) z += scale * complex_gaussian(rng);
  }

  return SynthResult{std::move(t), std::move(truth)};
}

}  // namespace cohten
