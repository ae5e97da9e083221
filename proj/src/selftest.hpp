#pragma once

#include <functional>
#include <string>

namespace vfwave {

// Runs the built-in oracle and invariant checks that need no external data,
// reporting one line per check. Returns the number of failures.
int selftest(const std::function<void(const std::string&)>& emit);

}  // namespace vfwave
