#pragma once

#include <stdexcept>
#include <string>

namespace hypflow {

// Base class for every error raised by the library. The CLI maps each
// subclass to a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed gluing data: unpaired face, non-involutive pairing, bad
// permutation, non-orientable gluing, edge folded onto itself.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Unreadable or ill-formed input file.
class InputError : public Error {
 public:
  using Error::Error;
};

// A vertex link with Euler characteristic >= 0 (sphere/torus boundary).
class BoundaryError : public Error {
 public:
  using Error::Error;
};

// Lengths or angles outside the space of hyperideal tetrahedra.
class InadmissibleError : public Error {
 public:
  InadmissibleError(const std::string& what, int tet = -1)
      : Error(what), tet_(tet) {}
  // Offending tetrahedron within a triangulation, or -1 for a lone shape.
  int tet() const { return tet_; }

 private:
  int tet_;
};

// Iterative method failed: Newton budget exhausted, line search stalled,
// step size underflow, or a factorization that should succeed did not.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypflow
