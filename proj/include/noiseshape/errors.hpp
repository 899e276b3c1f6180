#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace noiseshape {

// Process-level outcome categories. The CLI maps these directly to exit codes.
enum class Status {
    Ok = 0,
    CheckFailed = 1,  // a verification check ran and failed
    Usage = 2,        // bad arguments, bad config, unreadable/unwritable paths
    Numeric = 3,      // NaN/Inf encountered, divergence, numeric contract broken
};

class Error : public std::runtime_error {
  public:
    Error(Status s, std::string msg) : std::runtime_error(std::move(msg)), status_(s) {}
    Status status() const { return status_; }

  private:
    Status status_;
};

[[noreturn]] inline void fail_usage(const std::string& msg) {
    throw Error(Status::Usage, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw Error(Status::Numeric, msg);
}
[[noreturn]] inline void fail_check(const std::string& msg) {
    throw Error(Status::CheckFailed, msg);
}

}  // namespace noiseshape
