#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  Precondition,  ///< a mathematical precondition was violated (exit 2)
  Numerical,     ///< an algorithm failed to converge or became ill-posed (exit 3)
  Io,            ///< file or parse trouble outside the math (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::Precondition, what) {}
};

class DimensionError : public PreconditionError {
 public:
  explicit DimensionError(const std::string& what) : PreconditionError(what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace carnot
