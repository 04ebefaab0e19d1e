// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coalpp {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric argument violates a precondition (non-finite, out of range, ...).
class invalid_parameter : public error {
 public:
  using error::error;
};

/// Rectangle bounds are reversed, negative or non-finite.
class invalid_rect : public error {
 public:
  using error::error;
};

/// Two rectangles of a would-be disjoint union overlap; carries the offending
/// pair's indices.
class not_disjoint : public error {
 public:
  not_disjoint(std::size_t i, std::size_t j)
      : error("rectangles " + std::to_string(i) + " and " + std::to_string(j) + " overlap"),
        first(i),
        second(j) {}

  std::size_t first;
  std::size_t second;
};

/// A query rectangle reaches outside the realized window; never truncated.
class out_of_window : public error {
 public:
  using error::error;
};

/// The requested scale exceeds the resource guard.
class scale_limit : public error {
 public:
  using error::error;
};

/// An exact oracle was asked for a size it cannot handle.
class oracle_range : public error {
 public:
  using error::error;
};

}  // namespace coalpp
