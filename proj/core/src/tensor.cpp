// SPDX-License-Identifier: Apache-2.0
#include "cohten/tensor.hpp"

#include <cmath>
#include <string>

namespace cohten {

namespace {

void check_dims(int l, int m, int n) {
  if (l < 1 || m < 1 || n < 1) {
    throw dimension_error("Tensor3: dims must be >= 1, got " +
                          std::to_string(l) + "x" + std::to_string(m) + "x" +
                          std::to_string(n));
  }
}

bool all_finite(const std::vector<cx>& v) {
  for (const cx& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace

Tensor3::Tensor3(int l, int m, int n) : l_(l), m_(m), n_(n) {
  check_dims(l, m, n);
  data_.assign(static_cast<std::size_t>(l) * m * n, cx(0.0, 0.0));
}

Tensor3::Tensor3(int l, int m, int n, std::vector<cx> data)
    : l_(l), m_(m), n_(n), data_(std::move(data)) {
  check_dims(l, m, n);
  if (data_.size() != static_cast<std::size_t>(l) * m * n) {
    throw dimension_error("Tensor3: data size " + std::to_string(data_.size()) +
                          " does not match dims " + std::to_string(l) + "x" +
                          std::to_string(m) + "x" + std::to_string(n));
  }
  if (!all_finite(data_)) {
    throw domain_error("Tensor3: entries must be finite");
  }
}

const cx& Tensor3::at(int i, int j, int k) const {
  if (i < 0 || i >= l_ || j < 0 || j >= m_ || k < 0 || k >= n_) {
    throw dimension_error("Tensor3::at: index out of range");
  }
  return (*this)(i, j, k);
}

CpModel::CpModel(Eigen::VectorXcd lambda, Eigen::MatrixXcd u,
                 Eigen::MatrixXcd v, Eigen::MatrixXcd w)
    : lambda_(std::move(lambda)), u_(std::move(u)), v_(std::move(v)),
      w_(std::move(w)) {
  const Eigen::Index r = lambda_.size();
  if (r < 1) throw dimension_error("CpModel: rank must be >= 1");
  if (u_.cols() != r || v_.cols() != r || w_.cols() != r) {
    throw dimension_error("CpModel: factor column counts must equal rank");
  }
  if (u_.rows() < 1 || v_.rows() < 1 || w_.rows() < 1) {
    throw dimension_error("CpModel: factor matrices must have >= 1 row");
  }
  if (!lambda_.allFinite() || !u_.allFinite() || !v_.allFinite() ||
      !w_.allFinite()) {
    throw domain_error("CpModel: entries must be finite");
  }
  // Column norms are folded into the weights so stored columns are unit.
  for (Eigen::Index p = 0; p < r; ++p) {
    for (Eigen::MatrixXcd* f : {&u_, &v_, &w_}) {
      const double norm = f->col(p).norm();
      if (norm < 1e-300) {
        throw domain_error("CpModel: factor column " + std::to_string(p) +
                           " has near-zero norm");
      }
      f->col(p) /= norm;
      lambda_(p) *= norm;
    }
  }
}

double CpModel::lambda_max() const {
  return lambda_.cwiseAbs().maxCoeff();
}

Tensor3 outer3(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
               const Eigen::VectorXcd& w) {
  if (u.size() < 1 || v.size() < 1 || w.size() < 1) {
    throw dimension_error("outer3: vectors must be non-empty");
  }
  Tensor3 t(static_cast<int>(u.size()), static_cast<int>(v.size()),
            static_cast<int>(w.size()));
  for (int i = 0; i < t.dim0(); ++i) {
    for (int j = 0; j < t.dim1(); ++j) {
      const cx uv = u(i) * v(j);
      for (int k = 0; k < t.dim2(); ++k) t(i, j, k) = uv * w(k);
    }
  }
  return t;
}

double frobenius_norm(const Tensor3& a) {
  double s = 0.0;
  for (const cx& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

cx frobenius_inner(const Tensor3& a, const Tensor3& b) {
  if (!a.same_shape(b)) {
    throw dimension_error("frobenius_inner: shape mismatch");
  }
  cx s(0.0, 0.0);
  const std::vector<cx>& da = a.data();
  const std::vector<cx>& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * std::conj(db[i]);
  return s;
}

Tensor3 cp_evaluate(const CpModel& m) {
  Tensor3 t(m.dim0(), m.dim1(), m.dim2());
  for (int p = 0; p < m.rank(); ++p) {
    const cx lam = m.lambda()(p);
    for (int i = 0; i < t.dim0(); ++i) {
      const cx lu = lam * m.u()(i, p);
      for (int j = 0; j < t.dim1(); ++j) {
        const cx luv = lu * m.v()(j, p);
        for (int k = 0; k < t.dim2(); ++k) t(i, j, k) += luv * m.w()(k, p);
      }
    }
  }
  return t;
}

double residual(const Tensor3& a, const CpModel& m) {
  if (a.dim0() != m.dim0() || a.dim1() != m.dim1() || a.dim2() != m.dim2()) {
    throw dimension_error("residual: tensor and model shapes differ");
  }
  const Tensor3 approx = cp_evaluate(m);
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    s += std::norm(a.data()[i] - approx.data()[i]);
  }
  return std::sqrt(s);
}

}  // namespace cohten
