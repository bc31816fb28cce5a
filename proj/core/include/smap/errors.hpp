#pragma once

#include <stdexcept>
#include <string>

namespace smap {

/// Root of the library's exception hierarchy. `code()` is a short
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SMAP_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(tag, what) {}      \
  };

// Argument outside the mathematical domain of an operation.
SMAP_DEFINE_ERROR(DomainError, "domain")
// Interpolation or evaluation requested outside grid coverage.
SMAP_DEFINE_ERROR(OutOfDomainError, "out_of_domain")
// NaN/Inf or broken invariant detected in a stored state.
SMAP_DEFINE_ERROR(CorruptedStateError, "corrupted_state")
SMAP_DEFINE_ERROR(InvalidTripleError, "invalid_triple")
SMAP_DEFINE_ERROR(GridMismatchError, "grid_mismatch")
SMAP_DEFINE_ERROR(SingularSourceError, "singular_source")
SMAP_DEFINE_ERROR(StiffnessError, "stiffness")
SMAP_DEFINE_ERROR(FitWindowError, "fit_window")
SMAP_DEFINE_ERROR(ExtractionAmbiguousError, "extraction_ambiguous")
SMAP_DEFINE_ERROR(DegeneratePhaseError, "degenerate_phase")
SMAP_DEFINE_ERROR(StepFailure, "step_failure")
SMAP_DEFINE_ERROR(SmallnessViolation, "smallness")
SMAP_DEFINE_ERROR(ConfigError, "config")
SMAP_DEFINE_ERROR(IoError, "io")

#undef SMAP_DEFINE_ERROR

}  // namespace smap
