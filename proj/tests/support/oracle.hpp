#pragma once

// Reference search for cross-checking the engine. Plain recursion with
// continuations: no trail, no resumable state. Slow and obviously correct.

#include <functional>
#include <string>
#include <vector>

#include "cnp/model.hpp"
#include "cnp/primitives.hpp"

namespace oracle {

// Runs one primitive in the given direction; returns false on forward failure.
using Exec = std::function<bool(cnp::Direction, const cnp::PrimitiveCall&)>;

struct Result {
  std::vector<std::string> events;                // JSON lines, same shape as the engine trace
  std::vector<std::vector<std::string>> paths;     // "net/arrow" per solution
};

Result enumerate(const cnp::ControlNetwork& net, const Exec& exec);

}  // namespace oracle
