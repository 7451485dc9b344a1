#pragma once

namespace hypflow::cli {

// Exit codes are a stable contract.
enum ExitCode : int {
  kOk = 0,
  kPropertyViolation = 1,
  kInputError = 2,        // unreadable/ill-formed input, structural gluing error
  kBoundaryError = 3,     // a vertex link has Euler characteristic >= 0
  kDegenerated = 4,       // flow stopped at a degenerating tetrahedron
  kTMaxReached = 5,       // flow hit t_max before converging
  kInadmissible = 6,      // lengths/angles outside the admissible set
  kSolverFailure = 7,     // Newton, line search, step underflow, factorization
};

inline constexpr const char* kVersion = "0.1.0";

int run(int argc, char** argv);

}  // namespace hypflow::cli
