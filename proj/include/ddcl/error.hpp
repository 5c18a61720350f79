#pragma once

#include <stdexcept>
#include <string>

namespace ddcl {

// Bad input: preconditions, shapes, configuration. Maps to CLI exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A mathematical invariant failed at runtime (e.g. V < -1e-8, NaN gradient).
// Maps to CLI exit code 2.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace ddcl
