#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "cnp/model.hpp"
#include "cnp/primitives.hpp"

namespace cnp {

struct RunConfig {
  std::optional<std::size_t> max_solutions;
  std::optional<std::size_t> max_depth;  // maximum trail length
  std::ostream* trace = nullptr;         // JSON lines, one event per line
  VarStore initial_vars;
};

/// One forward step still on the active path.
struct PathStep {
  std::string subnet;
  std::size_t arrow = 0;

  bool operator==(const PathStep&) const = default;
};

struct SolutionReport {
  std::size_t index = 0;
  std::vector<PathStep> path;

  bool operator==(const SolutionReport&) const = default;
};

enum class Termination { Exhausted, SolutionLimit, DepthLimit, Aborted };

std::string_view to_string(Termination termination);

struct RunResult {
  std::vector<SolutionReport> solutions;
  std::size_t count = 0;
  Termination termination = Termination::Exhausted;
  std::string error;  // set when Aborted
};

namespace trail {

struct ItemDone {
  std::size_t subnet;  // index into the network's subnets
  std::size_t arrow;
  std::size_t item;
  BoundArgs args;
};
struct VarWrite {
  std::string name;
  std::optional<std::string> previous;
};
struct ArrowEntered {
  std::size_t subnet;
  std::size_t arrow;
  std::size_t alternative;  // position among the source state's choices
};
struct CallFrame {
  std::size_t callee;
  std::size_t caller_subnet;
  std::size_t caller_arrow;
  std::size_t caller_item;
};
struct SubnetEntered {
  CallFrame frame;
};
struct SubnetReturned {
  CallFrame frame;
  std::size_t final_state;  // state index within the callee
};

}  // namespace trail

using TrailEntry =
    std::variant<trail::ItemDone, trail::VarWrite, trail::ArrowEntered, trail::SubnetEntered, trail::SubnetReturned>;

/// A resumable depth-first search over one network. Solutions come out one
/// at a time in attempt order; run() is the same search driven to the end.
///
/// Not thread-safe. The network and registry must outlive the session.
class Session {
 public:
  /// Throws ValidationError for malformed networks and LoadError for calls
  /// that do not match the registry.
  Session(const ControlNetwork& net, const PrimitiveRegistry& registry, RunConfig config);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// The next solution, or nothing once the search has terminated.
  std::optional<SolutionReport> next_solution();

  bool finished() const;
  /// Meaningful once finished().
  Termination termination() const;
  const std::string& error() const;

  std::size_t solution_count() const;
  const VarStore& vars() const;
  const std::vector<TrailEntry>& trail() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const ControlNetwork& net, const PrimitiveRegistry& registry, RunConfig config);

/// Throws LoadError naming the first call site that does not resolve against
/// the registry with a matching signature.
void check_loadable(const ControlNetwork& net, const PrimitiveRegistry& registry);

std::string path_to_json(const std::vector<PathStep>& path);

}  // namespace cnp
