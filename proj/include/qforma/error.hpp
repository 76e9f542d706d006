#pragma once

#include <stdexcept>
#include <string>

namespace qforma {

// Coarse classification used by the CLI to pick exit codes:
// bad_input -> 2, everything else -> 3.
enum class ErrorKind {
  bad_input,             // unreadable/malformed files, dimension mismatches
  domain,                // parameter outside its mathematical domain
  not_positive_definite,
  infeasible_class,      // sparse-class generator cannot meet its constraints
  insufficient_moments,  // distribution lacks the requested moment
  too_few_samples,
  size,                  // dimension cap / enumeration cap exceeded
  decomposition_failure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace qforma
