#pragma once

#include <stdexcept>
#include <string>

namespace sheforge {

// Base of every error the library raises. kind() is the stable tag the CLI
// prints on stderr.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string &what) : Error("domain", what) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string &what) : Error("infeasible", what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string &what) : Error("numerical", what) {}
};

struct DegenerateFundamentalError : Error {
  explicit DegenerateFundamentalError(const std::string &what)
      : Error("degenerate_fundamental", what) {}
};

struct ExtrapolationError : Error {
  explicit ExtrapolationError(const std::string &what)
      : Error("extrapolation", what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string &what) : Error("format", what) {}
};

} // namespace sheforge
