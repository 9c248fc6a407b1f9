// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cohten/tensor.hpp"

namespace cohten {

/// Sentinel range for sources far enough that wavefront curvature is
/// dropped from the sensor phase model.
inline constexpr double kFarField = std::numeric_limits<double>::infinity();

inline bool is_far_field(double range) {
  return range == std::numeric_limits<double>::infinity();
}

/// Time envelope of one source across snapshots.
struct EnvelopeSpec {
  enum class Kind { gaussian, sinusoid, explicit_values };
  Kind kind = Kind::gaussian;
  // sinusoid: sigma(k) = amplitude * exp(i*(2*pi*freq*k + phase)), k from 0.
  double freq = 0.0;
  double phase = 0.0;
  double amplitude = 1.0;
  // explicit_values: one entry per snapshot.
  std::vector<cx> values;
};

struct Source {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit norm
  double range = kFarField;                              // > 0 or kFarField
  EnvelopeSpec envelope;
};

/// Geometry and excitation of a translated-subarray measurement campaign.
/// The first translation must be exactly zero: subarray 1 is the phase
/// reference.
struct ArrayScenario {
  std::vector<Eigen::Vector3d> sensors;
  std::vector<Eigen::Vector3d> translations;
  double omega = 0.0;     // radial frequency, > 0
  double celerity = 0.0;  // propagation speed, > 0
  std::vector<Source> sources;
  int snapshots = 0;
};

/// Throws domain_error on invalid geometry, frequencies, directions,
/// ranges, or envelope specs.
void validate_scenario(const ArrayScenario& scn);

/// Complex sensor response exp(i*(omega/c)*(b.d - |b x d|^2/(2R))) for a
/// sensor at b and a unit direction d; far-field drops the curvature term.
cx steering(const Eigen::Vector3d& sensor, const Eigen::Vector3d& direction,
            double range, double omega, double celerity);

/// Inter-subarray gain exp(i*(omega/c)*(delta.d)) for translation delta.
cx subarray_gain(const Eigen::Vector3d& delta,
                 const Eigen::Vector3d& direction, double omega,
                 double celerity);

/// The model that generated a synthesized tensor, with its per-mode
/// coherences. Weight p is the product of the norms of source p's sensor
/// responses, subarray gains, and envelope.
struct GroundTruth {
  CpModel model;
  double mu_u = 0.0, mu_v = 0.0, mu_w = 0.0;
};

struct SynthResult {
  Tensor3 tensor;  // noisy when snr_db is set
  GroundTruth truth;
};

/// Builds the sensors x subarrays x snapshots measurement tensor
///   s(i,j,k) = sum_p steering(i,p) * gain(j,p) * envelope_p(k),
/// optionally adding circular complex Gaussian noise with per-entry
/// variance set so the expected signal-to-noise power ratio matches snr_db.
/// Deterministic for a fixed seed: the RNG drives gaussian envelopes in
/// source order, then noise in storage order.
SynthResult synthesize(const ArrayScenario& scn,
                       std::optional<double> snr_db, std::uint64_t seed);

}  // namespace cohten
