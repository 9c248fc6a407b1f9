// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit and acceptance suites: scratch directories,
// deterministic random models, and the two antenna scenarios that are
// exercised end to end (synthesize -> decompose -> certify -> recover).
#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>
#include <Eigen/QR>

#include "cohten/array_model.hpp"
#include "cohten/coherence.hpp"
#include "cohten/rng.hpp"
#include "cohten/tensor.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("slurp: cannot open " + p.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void spit(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("spit: cannot write " + p.string());
}

inline Eigen::VectorXcd random_weights(std::mt19937_64& rng, int r,
                                       double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::uniform_real_distribution<double> ang(-std::numbers::pi,
                                             std::numbers::pi);
  Eigen::VectorXcd lambda(r);
  for (int p = 0; p < r; ++p) lambda(p) = std::polar(mag(rng), ang(rng));
  return lambda;
}

/// Arbitrary-coherence random model with unit factor columns.
inline cohten::CpModel random_model(std::uint64_t seed, int l, int m, int n,
                                    int r) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXcd lambda = random_weights(rng, r);
  Eigen::MatrixXcd u = cohten::random_unit_columns(rng, l, r);
  Eigen::MatrixXcd v = cohten::random_unit_columns(rng, m, r);
  Eigen::MatrixXcd w = cohten::random_unit_columns(rng, n, r);
  return cohten::CpModel(std::move(lambda), std::move(u), std::move(v),
                         std::move(w));
}

/// Unit columns with coherence at most `cap`: a random orthonormal frame
/// blended with a small perturbation, redrawn until the cap holds.
inline Eigen::MatrixXcd low_coherence_columns(std::mt19937_64& rng, int dim,
                                              int r, double cap) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::MatrixXcd g(dim, r), p(dim, r);
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < dim; ++i) {
        g(i, j) = cohten::complex_gaussian(rng);
        p(i, j) = cohten::complex_gaussian(rng);
      }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd cols =
        qr.householderQ() * Eigen::MatrixXcd::Identity(dim, r);
    cols += 0.25 * p;
    for (int j = 0; j < r; ++j) cols.col(j).normalize();
    if (cohten::coherence(cohten::ColumnSet(cols)) <= cap) return cols;
  }
  throw std::runtime_error("low_coherence_columns: cap never satisfied");
}

/// Rank-r model on a dim^3 cube whose per-mode coherences all satisfy the
/// cap, with weight magnitudes in [0.5, 2].
inline cohten::CpModel low_coherence_model(std::uint64_t seed, int dim, int r,
                                           double cap) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd u = low_coherence_columns(rng, dim, r, cap);
  Eigen::MatrixXcd v = low_coherence_columns(rng, dim, r, cap);
  Eigen::MatrixXcd w = low_coherence_columns(rng, dim, r, cap);
  Eigen::VectorXcd lambda = random_weights(rng, r);
  return cohten::CpModel(std::move(lambda), std::move(u), std::move(v),
                         std::move(w));
}

/// Two far-field sources with orthogonal sensor responses: a 4-sensor line
/// array along x at half-wavelength pitch, translated within the x-y plane.
/// Directions e_x and e_y both lie in the translation span, so they are
/// recoverable despite the subspace restriction.
inline cohten::ArrayScenario two_source_scenario() {
  cohten::ArrayScenario scn;
  scn.sensors = {{0.0, 0.0, 0.0},
                 {0.5, 0.0, 0.0},
                 {1.0, 0.0, 0.0},
                 {1.5, 0.0, 0.0}};
  scn.translations = {{0.0, 0.0, 0.0}, {0.24, 0.0, 0.0}, {0.0, 0.24, 0.0}};
  scn.omega = 2.0 * std::numbers::pi;
  scn.celerity = 1.0;
  scn.snapshots = 8;
  cohten::Source s1;
  s1.direction = Eigen::Vector3d::UnitX();
  s1.envelope.kind = cohten::EnvelopeSpec::Kind::gaussian;
  cohten::Source s2;
  s2.direction = Eigen::Vector3d::UnitY();
  s2.envelope.kind = cohten::EnvelopeSpec::Kind::sinusoid;
  s2.envelope.freq = 0.22;
  s2.envelope.phase = 0.4;
  s2.envelope.amplitude = 1.0;
  scn.sources = {s1, s2};
  return scn;
}

/// Three far-field sources on a 2x2 planar array, three snapshots. The
/// sensor responses for e_x, e_y, e_z are pairwise orthogonal, and the
/// sinusoid frequencies 0, 1/3, 2/3 make the envelopes a DFT basis, so the
/// expansion is certifiably unique (factor k-ranks 3 + 3 + 3 >= 2*3 + 2).
/// The e_z source has zero phase across the in-plane translations, so its
/// direction is unrecoverable (flagged), but its waveform is not.
inline cohten::ArrayScenario three_source_scenario() {
  cohten::ArrayScenario scn;
  scn.sensors = {{0.0, 0.0, 0.0},
                 {0.5, 0.0, 0.0},
                 {0.0, 0.5, 0.0},
                 {0.5, 0.5, 0.0}};
  scn.translations = {{0.0, 0.0, 0.0}, {0.24, 0.0, 0.0}, {0.0, 0.24, 0.0}};
  scn.omega = 2.0 * std::numbers::pi;
  scn.celerity = 1.0;
  scn.snapshots = 3;
  const Eigen::Vector3d dirs[3] = {Eigen::Vector3d::UnitX(),
                                   Eigen::Vector3d::UnitY(),
                                   Eigen::Vector3d::UnitZ()};
  for (int p = 0; p < 3; ++p) {
    cohten::Source s;
    s.direction = dirs[p];
    s.envelope.kind = cohten::EnvelopeSpec::Kind::sinusoid;
    s.envelope.freq = p / 3.0;
    s.envelope.phase = 0.0;
    s.envelope.amplitude = 1.0;
    scn.sources.push_back(s);
  }
  return scn;
}

}  // namespace testutil
