// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>

#include <Eigen/Core>

#include "cohten/errors.hpp"

namespace cohten {

/// Sentinel for the spark of a linearly independent collection: no dependent
/// subset exists, so the smallest one has "infinite" cardinality.
inline constexpr int kInfiniteSpark = std::numeric_limits<int>::max();

inline bool is_infinite_spark(int spark) { return spark == kInfiniteSpark; }

/// A collection of unit-norm columns in C^m. The constructor checks the
/// unit-norm invariant (within 1e-12); normalized() rescales arbitrary
/// nonzero columns first.
class ColumnSet {
 public:
  explicit ColumnSet(Eigen::MatrixXcd columns);

  /// Rescales every column to unit norm, rejecting near-zero columns.
  static ColumnSet normalized(Eigen::MatrixXcd columns);

  int dim() const { return static_cast<int>(columns_.rows()); }
  int count() const { return static_cast<int>(columns_.cols()); }
  const Eigen::MatrixXcd& columns() const { return columns_; }

 private:
  Eigen::MatrixXcd columns_;
};

/// Summary of the dependence structure of a column collection. girth always
/// equals spark: the collection is the ground set of the matroid whose
/// circuits are its minimal dependent subsets.
struct CoherenceReport {
  double mu = 0.0;       // in [0, 1]
  int spark = 2;         // >= 2, or kInfiniteSpark
  int krank = 1;         // spark - 1 when finite, count() otherwise
  int girth = 2;         // == spark
};

/// Largest pairwise inner-product magnitude, max_{p != q} |<v_p, v_q>|.
/// Zero for a single column. Always in [0, 1] for unit columns.
double coherence(const ColumnSet& v);

/// Cardinality of the smallest linearly dependent subset, found by
/// exhaustive search over subsets in increasing size. A subset counts as
/// dependent when its smallest singular value is <= tol times its largest.
/// Collections of more than 24 columns are rejected (the search is
/// exponential); use the coherence lower bounds instead.
int spark(const ColumnSet& v, double tol = 1e-9);

/// Largest k such that every k columns are linearly independent:
/// spark - 1 when spark is finite, count() otherwise.
int krank(const ColumnSet& v, double tol = 1e-9);

/// Full report: coherence, spark, krank, girth in one pass.
CoherenceReport analyze_columns(const ColumnSet& v, double tol = 1e-9);

/// Coherence-derived lower bounds (spark_lb, krank_lb) = (1 + 1/mu, 1/mu).
/// For mu = 0 both are infinite. spark >= 1 + 1/mu holds unconditionally;
/// the krank bound is guaranteed in the clamped form
/// krank >= min(count, 1/mu), since a full-krank collection has no
/// dependent subset to witness the unclamped bound.
struct SparkBounds {
  double spark_lb;
  double krank_lb;
};
SparkBounds spark_coherence_bounds(double mu);

}  // namespace cohten
