#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnp/primitives.hpp"

namespace cnp {

enum class WaitMode { Sync, Detached };
enum class CaptureMode { None, FirstLine, AllLines };

struct TestMap {
  std::string success_token = "1";
  std::string failure_token = "0";
};

/// A primitive implemented by an external executable.
///
/// Command templates are whitespace-separated argv tokens; `{1}`..`{n}`
/// inside a token expands to the n-th bound In value. No shell is involved,
/// so an expanded value is always exactly one argv element.
struct ForeignPrimitiveSpec {
  std::string name;
  std::vector<ParamSpec> params;
  PrimitiveKind kind = PrimitiveKind::Action;
  std::vector<std::string> forward_cmd;
  std::optional<std::vector<std::string>> backward_cmd;
  WaitMode wait = WaitMode::Sync;
  CaptureMode capture = CaptureMode::None;
  std::optional<std::size_t> result_slot;  // 0-based index among the Out params
  std::optional<TestMap> test_map;
  // Run backward_cmd right after a forward Failure, for scripts that mutate
  // shared files before deciding the test.
  bool undo_on_failure = false;
};

/// Throws ManifestError when the spec's own invariants do not hold.
void check_spec(const ForeignPrimitiveSpec& spec);

/// Splits a template string on whitespace.
std::vector<std::string> split_command(std::string_view text);

/// Throws PlaceholderOutOfRange.
std::vector<std::string> render_command(const std::vector<std::string>& tmpl, const std::vector<std::string>& in_values);

struct CapturedOutput {
  std::vector<std::string> lines;
  int exit_code = 0;
};

struct ProcessOptions {
  std::filesystem::path working_dir;  // empty = inherit
  CaptureMode capture = CaptureMode::FirstLine;
};

/// Spawns argv (PATH lookup for bare names), waits for exit and captures
/// stdout as UTF-8 lines. stdin and stderr are inherited.
/// Throws SpawnError, DecodeError.
CapturedOutput run_sync(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// Spawns argv fully detached and returns without waiting. Throws SpawnError.
void spawn_detached(const std::vector<std::string>& argv, const std::filesystem::path& working_dir = {});

Outcome interpret_outcome(const ForeignPrimitiveSpec& spec, const CapturedOutput& out, BoundArgs* bound = nullptr);

/// Wraps a foreign spec as a registrable primitive. Relative program and
/// script paths resolve against working_dir.
PrimitiveDef make_foreign_primitive(ForeignPrimitiveSpec spec, std::filesystem::path working_dir);

bool is_valid_utf8(std::string_view text);

// Shared scratch files used by file-backed primitives:
//   positions.txt  one line "<monkey> <box>\n"
//   steps.txt      one step per line
// All throw IoError on filesystem failure.

void scratch_write_positions(const std::filesystem::path& path, std::string_view monkey, std::string_view box);
std::pair<std::string, std::string> scratch_read_positions(const std::filesystem::path& path);

void scratch_append_step(const std::filesystem::path& path, std::string_view step);
/// Removes and returns the last line. Throws EmptyJournal on an empty file.
std::string scratch_pop_step(const std::filesystem::path& path);
std::vector<std::string> scratch_read_steps(const std::filesystem::path& path);

}  // namespace cnp
