// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cohten/errors.hpp"

namespace cohten {

using cx = std::complex<double>;

/// Dense order-3 tensor with complex entries.
///
/// Entries are stored row-major: the first index is slowest, the last is
/// fastest, i.e. entry (i,j,k) sits at flat offset (i*m + j)*n + k. The
/// layout is part of the public contract (file formats and unfoldings rely
/// on it). Constructors reject non-finite entries; operator() gives
/// unchecked access and expects callers to keep entries finite.
class Tensor3 {
 public:
  /// Zero tensor of shape l x m x n. All dims must be >= 1.
  Tensor3(int l, int m, int n);

  /// Wraps existing data; size must equal l*m*n and every entry finite.
  Tensor3(int l, int m, int n, std::vector<cx> data);

  int dim0() const { return l_; }
  int dim1() const { return m_; }
  int dim2() const { return n_; }
  std::size_t size() const { return data_.size(); }

  cx& operator()(int i, int j, int k) {
    return data_[static_cast<std::size_t>((i * m_ + j)) * n_ + k];
  }
  const cx& operator()(int i, int j, int k) const {
    return data_[static_cast<std::size_t>((i * m_ + j)) * n_ + k];
  }

  /// Bounds-checked access.
  const cx& at(int i, int j, int k) const;

  const std::vector<cx>& data() const { return data_; }
  std::vector<cx>& data() { return data_; }

  bool same_shape(const Tensor3& other) const {
    return l_ == other.l_ && m_ == other.m_ && n_ == other.n_;
  }

 private:
  int l_, m_, n_;
  std::vector<cx> data_;
};

/// Weighted sum of vector outer products with unit-norm factor columns:
/// the model represents sum_p lambda_p u_p (x) v_p (x) w_p.
///
/// The constructor normalizes every factor column and folds the norms into
/// the weights, so stored columns are unit to machine precision. Columns
/// with norm below 1e-300 are rejected as degenerate.
class CpModel {
 public:
  CpModel(Eigen::VectorXcd lambda, Eigen::MatrixXcd u, Eigen::MatrixXcd v,
          Eigen::MatrixXcd w);

  int rank() const { return static_cast<int>(lambda_.size()); }
  int dim0() const { return static_cast<int>(u_.rows()); }
  int dim1() const { return static_cast<int>(v_.rows()); }
  int dim2() const { return static_cast<int>(w_.rows()); }

  const Eigen::VectorXcd& lambda() const { return lambda_; }
  const Eigen::MatrixXcd& u() const { return u_; }
  const Eigen::MatrixXcd& v() const { return v_; }
  const Eigen::MatrixXcd& w() const { return w_; }

  /// Largest weight magnitude, max_p |lambda_p|.
  double lambda_max() const;

 private:
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd u_, v_, w_;
};

/// Rank-1 tensor u (x) v (x) w, entry (i,j,k) = u_i * v_j * w_k.
Tensor3 outer3(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v,
               const Eigen::VectorXcd& w);

/// Frobenius norm, sqrt(sum |a_ijk|^2).
double frobenius_norm(const Tensor3& a);

/// Frobenius inner product, conjugate-linear in the second argument:
/// sum_ijk a_ijk * conj(b_ijk).
cx frobenius_inner(const Tensor3& a, const Tensor3& b);

/// Materializes the model as a dense tensor.
Tensor3 cp_evaluate(const CpModel& m);

/// || a - cp_evaluate(m) ||_F.
double residual(const Tensor3& a, const CpModel& m);

}  // namespace cohten
