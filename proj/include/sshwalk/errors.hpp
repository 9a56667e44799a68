#pragma once

#include <stdexcept>
#include <string>

namespace sshwalk {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

// E_k = 0 (v = w, k = pi): the phase and the eigenvectors are indeterminate.
struct GapClosure : Error {
  using Error::Error;
};

struct WindingUndefined : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  using Error::Error;
};

struct GeometryError : Error {
  using Error::Error;
};

}  // namespace sshwalk
