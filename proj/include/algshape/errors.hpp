#pragma once

#include <stdexcept>
#include <string>

namespace algshape {

/// Bad arguments, malformed files, violated preconditions.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical stage failed (infeasible program, singular system, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace algshape
