#pragma once

#include <stdexcept>
#include <string>

namespace oxicopd {

/// Base error for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input data that violates a documented invariant (manifest rows, feature tables).
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace oxicopd
