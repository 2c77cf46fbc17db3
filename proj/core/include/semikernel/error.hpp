#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semikernel {

enum class ErrorCode {
  invalid_argument,
  unknown_potential,
  non_finite,
  no_convergence,
  horizon_exceeded,
  singular_jacobian,
  grid_too_coarse,
  conjugate_point,
  truncation_too_tight,
  degenerate_fit,
  io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semikernel
