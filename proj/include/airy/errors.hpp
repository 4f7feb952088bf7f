#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace airy {

// Malformed or out-of-domain input. The CLI maps this to exit code 1.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configured cap (degree, walk count, budget) was exceeded. Exit code 2.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::uint64_t progress = 0)
        : std::runtime_error(what), progress_(progress) {}
    // Work completed before the cap tripped (e.g. walks enumerated so far).
    std::uint64_t progress() const { return progress_; }

private:
    std::uint64_t progress_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ArgumentError(msg);
}

}  // namespace airy
