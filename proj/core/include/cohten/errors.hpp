// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace cohten {

/// Base class for all cohten exceptions.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between operands (tensor dims, factor column counts, ...).
class dimension_error : public error {
 public:
  using error::error;
};

/// Input outside the mathematical domain of an operation: zero tensors,
/// coherences outside their valid interval, non-finite entries, degenerate
/// geometry.
class domain_error : public error {
 public:
  using error::error;
};

/// Request exceeds a hard combinatorial limit (e.g. exhaustive spark search).
class capacity_error : public error {
 public:
  using error::error;
};

/// File missing, unreadable, or not in the expected format.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace cohten
