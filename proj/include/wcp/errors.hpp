#ifndef WCP_ERRORS_HPP
#define WCP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wcp {

/// Malformed parameters or a violated precondition.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A vertex enumeration or active set grew past its configured cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace wcp

#endif  // WCP_ERRORS_HPP
