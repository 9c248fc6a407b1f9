// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cohten/array_model.hpp"
#include "cohten/degeneracy.hpp"
#include "cohten/recover.hpp"
#include "cohten/solve.hpp"
#include "cohten/tensor.hpp"

namespace cohten {

// Text tensor format: line "CT3 1", line "l m n", then l*m*n lines "re im"
// in storage order (first index slowest). Floats are written with 17
// significant digits so values round-trip exactly.
Tensor3 read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor3& t);

// Text matrix format: line "CMX 1", line "m r", then m*r lines "re im" in
// column-major order.
Eigen::MatrixXcd read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path,
                  const Eigen::MatrixXcd& m);

// Model JSON: {"r", "dims", "lambda", "U", "V", "W"}, complex values as
// [re, im] pairs, factors flattened column-major.
CpModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const CpModel& m);

// Scenario JSON; see the README for the schema. Source directions are
// normalized on load.
ArrayScenario read_scenario(const std::filesystem::path& path);

// Solver trace CSV: iter,residual,lambda_max,mu_u,mu_v,mu_w.
void write_trace_csv(const std::filesystem::path& path,
                     const SolveTrace& trace);

// Degeneracy table CSV: n,dist_to_limit,lambda_max_explicit,mu_u,mu_v,mu_w.
void write_demo_csv(const std::filesystem::path& path,
                    const std::vector<DegeneracyRow>& rows);

// Recovery report JSON: per-source direction, angular error, correlation,
// flags, waveform, plus the term permutation.
void write_report_json(const std::filesystem::path& path,
                       const RecoveryResult& result);

/// A file touched by a run, with the CRC-32 of its bytes at run time.
struct ManifestArtifact {
  std::string path;
  std::uint32_t crc32 = 0;
};

/// Record of one tool invocation: resolved options, seed, input/output
/// artifacts with checksums, wall time. Identical inputs and options yield
/// byte-identical numerical outputs; the manifest itself varies through
/// wall_time_s.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> options;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<ManifestArtifact> inputs;
  std::vector<ManifestArtifact> outputs;
  double wall_time_s = 0.0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// CRC-32 of a file's bytes, for manifest bookkeeping.
std::uint32_t crc32_file(const std::filesystem::path& path);

}  // namespace cohten
