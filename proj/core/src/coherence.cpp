// SPDX-License-Identifier: Apache-2.0
#include "cohten/coherence.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/SVD>

namespace cohten {

namespace {

constexpr int kMaxExhaustiveColumns = 24;

// Smallest and largest singular values of the selected columns.
std::pair<double, double> extreme_singular_values(const Eigen::MatrixXcd& v,
                                                  const std::vector<int>& idx) {
  Eigen::MatrixXcd sub(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = v.col(idx[c]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
  const auto& sv = svd.singularValues();
  return {sv(sv.size() - 1), sv(0)};
}

// Advances idx to the next size-s combination of {0..r-1} in lexicographic
// order; returns false after the last one.
bool next_combination(std::vector<int>& idx, int r) {
  const int s = static_cast<int>(idx.size());
  int i = s - 1;
  while (i >= 0 && idx[i] == r - s + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

}  // namespace

ColumnSet::ColumnSet(Eigen::MatrixXcd columns) : columns_(std::move(columns)) {
  if (columns_.rows() < 1 || columns_.cols() < 1) {
    throw dimension_error("ColumnSet: matrix must be at least 1x1");
  }
  if (!columns_.allFinite()) {
    throw domain_error("ColumnSet: entries must be finite");
  }
  for (Eigen::Index p = 0; p < columns_.cols(); ++p) {
    if (std::abs(columns_.col(p).norm() - 1.0) > 1e-12) {
      throw domain_error("ColumnSet: column " + std::to_string(p) +
                         " is not unit norm");
    }
  }
}

ColumnSet ColumnSet::normalized(Eigen::MatrixXcd columns) {
  if (columns.rows() < 1 || columns.cols() < 1) {
    throw dimension_error("ColumnSet: matrix must be at least 1x1");
  }
  for (Eigen::Index p = 0; p < columns.cols(); ++p) {
    const double norm = columns.col(p).norm();
    if (norm < 1e-300) {
      throw domain_error("ColumnSet: column " + std::to_string(p) +
                         " has near-zero norm");
    }
    columns.col(p) /= norm;
  }
  return ColumnSet(std::move(columns));
}

double coherence(const ColumnSet& v) {
  const int r = v.count();
  if (r == 1) return 0.0;
  double mu = 0.0;
  const Eigen::MatrixXcd& c = v.columns();
  for (int p = 0; p < r; ++p) {
    for (int q = p + 1; q < r; ++q) {
      mu = std::max(mu, std::abs(c.col(q).dot(c.col(p))));
    }
  }
  return std::min(mu, 1.0);
}

int spark(const ColumnSet& v, double tol) {
  const int r = v.count();
  const int m = v.dim();
  if (r > kMaxExhaustiveColumns) {
    throw capacity_error(
        "spark: " + std::to_string(r) + " columns exceed the exhaustive " +
        "search limit of " + std::to_string(kMaxExhaustiveColumns) +
        "; use the coherence lower bound spark >= 1 + 1/mu instead");
  }
  if (tol < 0.0) throw domain_error("spark: tol must be >= 0");

  // A full-column-rank collection has no dependent subset at all.
  {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v.columns());
    const auto& sv = svd.singularValues();
    if (r <= m && sv(sv.size() - 1) > tol * sv(0)) return kInfiniteSpark;
  }

  // Smallest dependent subset, by exhaustive search in increasing size.
  // Any m+1 columns of C^m are dependent, so sizes beyond m+1 never occur.
  const int max_size = std::min(r, m + 1);
  for (int s = 2; s <= max_size; ++s) {
    if (s > m) return s;  // more columns than dimensions
    std::vector<int> idx(s);
    for (int i = 0; i < s; ++i) idx[i] = i;
    do {
      const auto [smin, smax] = extreme_singular_values(v.columns(), idx);
      if (smin <= tol * smax) return s;
    } while (next_combination(idx, r));
  }
  return kInfiniteSpark;
}

int krank(const ColumnSet& v, double tol) {
  const int s = spark(v, tol);
  return is_infinite_spark(s) ? v.count() : s - 1;
}

CoherenceReport analyze_columns(const ColumnSet& v, double tol) {
  CoherenceReport rep;
  rep.mu = coherence(v);
  rep.spark = spark(v, tol);
  rep.krank = is_infinite_spark(rep.spark) ? v.count() : rep.spark - 1;
  rep.girth = rep.spark;
  return rep;
}

SparkBounds spark_coherence_bounds(double mu) {
  if (mu < 0.0 || mu > 1.0) {
    throw domain_error("spark_coherence_bounds: mu must be in [0, 1]");
  }
  if (mu == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  return {1.0 + 1.0 / mu, 1.0 / mu};
}

}  // namespace cohten
