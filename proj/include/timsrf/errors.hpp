#pragma once

#include <stdexcept>
#include <string>

namespace timsrf {

/// Coarse error classes. The CLI maps `input` to exit code 2 and
/// `numerical` to exit code 3.
enum class ErrorKind { input, numerical };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InputError : public Error {
public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

// input-side failures
struct InvalidInstance : InputError { using InputError::InputError; };
struct InvalidArgument : InputError { using InputError::InputError; };
struct DegenerateInstance : InputError { using InputError::InputError; };
struct ParseError : InputError { using InputError::InputError; };
struct SchemaError : InputError { using InputError::InputError; };
struct UnsupportedAttribute : InputError { using InputError::InputError; };
struct DegenerateColumn : InputError { using InputError::InputError; };
struct EmptyTraining : InputError { using InputError::InputError; };
struct UndefinedAuc : InputError { using InputError::InputError; };
struct BoundUndefined : InputError { using InputError::InputError; };
struct NoNullSpace : InputError { using InputError::InputError; };

// numerical failures
struct DecompositionError : NumericalError { using NumericalError::NumericalError; };
struct DivergenceError : NumericalError { using NumericalError::NumericalError; };

} // namespace timsrf
