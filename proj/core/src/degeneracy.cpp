// SPDX-License-Identifier: Apache-2.0
#include "cohten/degeneracy.hpp"

#include <string>

#include <Eigen/SVD>

#include "cohten/coherence.hpp"

namespace cohten {

namespace {

constexpr std::int64_t kDirectFormulaLimit = 1000000000;  // 1e9

void add_scaled(Tensor3& acc, const Tensor3& t, double s) {
  for (std::size_t i = 0; i < acc.data().size(); ++i) {
    acc.data()[i] += s * t.data()[i];
  }
}

}  // namespace

DslInstance DslInstance::orthonormal(int m) {
  if (m < 2) throw dimension_error("DslInstance: m must be >= 2");
  DslInstance inst;
  inst.u = Eigen::MatrixXcd::Zero(m, 3);
  inst.v = Eigen::MatrixXcd::Zero(m, 3);
  for (int i = 0; i < 3; ++i) {
    inst.u(0, i) = cx(1.0, 0.0);
    inst.v(1, i) = cx(1.0, 0.0);
  }
  return inst;
}

void validate_instance(const DslInstance& inst) {
  if (inst.u.cols() != 3 || inst.v.cols() != 3) {
    throw dimension_error("DslInstance: u and v need exactly 3 columns");
  }
  if (inst.u.rows() != inst.v.rows() || inst.u.rows() < 2) {
    throw dimension_error(
        "DslInstance: u and v must share a common length >= 2");
  }
  if (!inst.u.allFinite() || !inst.v.allFinite()) {
    throw domain_error("DslInstance: entries must be finite");
  }
  for (int i = 0; i < 3; ++i) {
    const double nu = inst.u.col(i).norm();
    const double nv = inst.v.col(i).norm();
    if (nu < 1e-300 || nv < 1e-300) {
      throw domain_error("DslInstance: zero vector in pair " +
                         std::to_string(i + 1));
    }
    Eigen::MatrixXcd pair(inst.u.rows(), 2);
    pair.col(0) = inst.u.col(i) / nu;
    pair.col(1) = inst.v.col(i) / nv;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pair);
    if (svd.singularValues()(1) <= 1e-9) {
      throw domain_error("DslInstance: pair " + std::to_string(i + 1) +
                         " is linearly dependent; the limit tensor would "
                         "not have rank 3");
    }
  }
}

Tensor3 dsl_limit(const DslInstance& inst) {
  validate_instance(inst);
  Tensor3 a = outer3(inst.u.col(0), inst.u.col(1), inst.v.col(2));
  add_scaled(a, outer3(inst.u.col(0), inst.v.col(1), inst.u.col(2)), 1.0);
  add_scaled(a, outer3(inst.v.col(0), inst.u.col(1), inst.u.col(2)), 1.0);
  return a;
}

Tensor3 dsl_sequence(const DslInstance& inst, std::int64_t n) {
  validate_instance(inst);
  if (n < 1) throw domain_error("dsl_sequence: n must be >= 1");
  const double nd = static_cast<double>(n);
  if (n <= kDirectFormulaLimit) {
    const Eigen::VectorXcd a1 = inst.u.col(0) + inst.v.col(0) / nd;
    const Eigen::VectorXcd a2 = inst.u.col(1) + inst.v.col(1) / nd;
    const Eigen::VectorXcd a3 = inst.u.col(2) + inst.v.col(2) / nd;
    Tensor3 t = outer3(a1, a2, a3);
    for (cx& z : t.data()) z *= nd;
    add_scaled(t, outer3(inst.u.col(0), inst.u.col(1), inst.u.col(2)), -nd);
    return t;
  }
  // Expanded form: the O(n) terms cancel exactly, leaving
  // A + (1/n)(u1 v2 v3 + v1 u2 v3 + v1 v2 u3) + (1/n^2) v1 v2 v3.
  Tensor3 t = dsl_limit(inst);
  add_scaled(t, outer3(inst.u.col(0), inst.v.col(1), inst.v.col(2)), 1.0 / nd);
  add_scaled(t, outer3(inst.v.col(0), inst.u.col(1), inst.v.col(2)), 1.0 / nd);
  add_scaled(t, outer3(inst.v.col(0), inst.v.col(1), inst.u.col(2)), 1.0 / nd);
  add_scaled(t, outer3(inst.v.col(0), inst.v.col(1), inst.v.col(2)),
             1.0 / (nd * nd));
  return t;
}

CpModel dsl_sequence_model(const DslInstance& inst, std::int64_t n) {
  validate_instance(inst);
  if (n < 1) throw domain_error("dsl_sequence_model: n must be >= 1");
  const double nd = static_cast<double>(n);
  Eigen::MatrixXcd u(inst.u.rows(), 2), v(inst.u.rows(), 2),
      w(inst.u.rows(), 2);
  u.col(0) = inst.u.col(0) + inst.v.col(0) / nd;
  v.col(0) = inst.u.col(1) + inst.v.col(1) / nd;
  w.col(0) = inst.u.col(2) + inst.v.col(2) / nd;
  u.col(1) = inst.u.col(0);
  v.col(1) = inst.u.col(1);
  w.col(1) = inst.u.col(2);
  Eigen::VectorXcd lambda(2);
  lambda << cx(nd, 0.0), cx(-nd, 0.0);
  return CpModel(lambda, u, v, w);
}

DegeneracyReport demo_degeneracy(
    const DslInstance& inst, const std::vector<std::int64_t>& n_list,
    const SolverOptions& opts,
    const std::optional<std::array<double, 3>>& caps) {
  validate_instance(inst);
  if (n_list.empty()) {
    throw domain_error("demo_degeneracy: n_list must not be empty");
  }

  const Tensor3 a = dsl_limit(inst);
  std::vector<DegeneracyRow> rows;
  for (std::int64_t n : n_list) {
    const Tensor3 an = dsl_sequence(inst, n);
    Tensor3 diff = an;
    add_scaled(diff, a, -1.0);
    const CpModel explicit_model = dsl_sequence_model(inst, n);
    DegeneracyRow row;
    row.n = n;
    row.dist_to_limit = frobenius_norm(diff);
    row.lambda_max_explicit = explicit_model.lambda_max();
    row.mu_u = coherence(ColumnSet(explicit_model.u()));
    row.mu_v = coherence(ColumnSet(explicit_model.v()));
    row.mu_w = coherence(ColumnSet(explicit_model.w()));
    rows.push_back(row);
  }

  SolverOptions run = opts;
  run.r = 2;
  run.mu_caps.reset();
  DegeneracyReport report{std::move(rows), als_decompose(a, run),
                          std::nullopt};
  if (caps) {
    run.mu_caps = *caps;
    report.constrained = constrained_decompose(a, run);
  }
  return report;
}

}  // namespace cohten
