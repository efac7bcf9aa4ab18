#pragma once

#include <stdexcept>
#include <string>

namespace gratwave {

/// Process exit codes shared by every front end.
enum class ExitCode : int {
  Success = 0,
  InputError = 2,
  RefusedRegime = 3,
  SolverFailure = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid user input: malformed documents, bad parameters, violated preconditions.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::InputError, what) {}
};

/// The requested computation lies in a regime where the functional is unbounded
/// or has no minimizer, so the solver refuses to run.
class RefusedRegime : public Error {
 public:
  explicit RefusedRegime(const std::string& what) : Error(ExitCode::RefusedRegime, what) {}
};

/// An iterative method failed to converge or detected an inconsistency.
class SolverFailure : public Error {
 public:
  explicit SolverFailure(const std::string& what) : Error(ExitCode::SolverFailure, what) {}
};

}  // namespace gratwave
