#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cnp/primitives.hpp"

namespace cnp {

/// Where native primitives talk to the user. A null `in` means prompting is
/// unavailable and missing input is an error.
struct Console {
  std::istream* in = nullptr;
  std::ostream* out = nullptr;
};

// ---------------------------------------------------------------------------
// Body mass index

enum class BmiCategory { Thin, Healthy, Overweight, Obese };

std::string_view to_string(BmiCategory category);

struct BmiReading {
  double bmi = 0.0;
  BmiCategory category = BmiCategory::Thin;
};

/// Category thresholds are strict upper bounds: 19, 25, 30.
BmiCategory classify_bmi_value(double bmi);

/// bmi = kg / (cm/100)^2. Throws NonPositiveInput.
BmiReading classify_bmi(std::int64_t kg, std::int64_t cm);

/// Fixed six-decimal rendering used between primitives ("22.857143").
std::string format_bmi(double bmi);

// ---------------------------------------------------------------------------
// Monkey and Banana

struct MbState {
  std::string monkey_pos;
  std::string box_pos;
  std::size_t step_ptr = 0;        // live steps are steps[1..step_ptr]
  std::vector<std::string> steps;  // steps[0] unused

  bool operator==(const MbState&) const = default;
};

/// The five primitives of the Monkey-and-Banana program plus the At(place)
/// guard used by the Room subnet. State lives in the pack, and each action
/// undoes its own effect when run backward.
class MonkeyBanana {
 public:
  explicit MonkeyBanana(Console console) : console_(console) {}

  const MbState& state() const { return state_; }
  void set_state(MbState s) { state_ = std::move(s); }

  Outcome init(Direction direction, ExecutionContext& ctx);
  Outcome at(std::string_view place) const;
  Outcome walk(Direction direction, const std::string& from, const std::string& to);
  Outcome push(Direction direction, const std::string& from, const std::string& to);
  Outcome climb(Direction direction);
  Outcome print(Direction direction, ExecutionContext& ctx);

  /// Registers Init, At, Walk, Push, Climb, Print. Handlers share `pack`.
  static void register_all(const std::shared_ptr<MonkeyBanana>& pack, PrimitiveRegistry& registry,
                           const std::vector<std::string>& only = {});

 private:
  void record(std::string step);

  Console console_;
  MbState state_;
};

/// Reads the monkey and box places from the store (`Monkey`, `Box`) or, when
/// absent, by prompting. Throws Error on invalid places or missing input.
std::pair<std::string, std::string> read_initial_places(const Console& console, const ExecutionContext& ctx);

// ---------------------------------------------------------------------------
// Catalog

struct NativeEnvironment {
  Console console;
  std::filesystem::path scratch_dir;  // where positions.txt / steps.txt live
};

/// Every native primitive name the catalog can provide.
std::vector<std::string> native_names();

/// Registers the named natives. Throws ManifestError for unknown names.
void add_natives(PrimitiveRegistry& registry, const std::vector<std::string>& names, const NativeEnvironment& env);

}  // namespace cnp
