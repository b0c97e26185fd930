#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace merplan {

/// Base class for all failures raised by this library. Every error carries a
/// stable machine-readable code next to the human-readable message, so the
/// CLI can emit single-line diagnostics.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

#define MERPLAN_DEFINE_ERROR(NAME)                                           \
    class NAME : public Error {                                              \
      public:                                                                 \
        explicit NAME(const std::string& message) : Error(#NAME, message) {}  \
    }

MERPLAN_DEFINE_ERROR(DuplicateBranchId);
MERPLAN_DEFINE_ERROR(DisconnectedBaseGraph);
MERPLAN_DEFINE_ERROR(NonRadialClosedSet);
MERPLAN_DEFINE_ERROR(UnknownNode);
MERPLAN_DEFINE_ERROR(UnknownBranch);
MERPLAN_DEFINE_ERROR(EmptyPopulation);
MERPLAN_DEFINE_ERROR(MissingReconfiguration);
MERPLAN_DEFINE_ERROR(CountExceedsCandidates);
MERPLAN_DEFINE_ERROR(EnumerationBudgetExceeded);
MERPLAN_DEFINE_ERROR(VectorTooShort);
MERPLAN_DEFINE_ERROR(ParseError);
MERPLAN_DEFINE_ERROR(ConfigError);

#undef MERPLAN_DEFINE_ERROR

}  // namespace merplan
