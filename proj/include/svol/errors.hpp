// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace svol {

/// A precondition on an argument was violated (out-of-range coordinate, shape mismatch, ...).
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A file or byte buffer does not match the expected on-disk layout.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The input is well formed but uses a variant this library does not read (color PFM, big-endian PLY).
class UnsupportedFormat : public FormatError {
  public:
    using FormatError::FormatError;
};

/// A dense materialization would exceed the caller's memory budget.
class BudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace svol
