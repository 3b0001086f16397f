#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/model.hpp"

namespace cnp {

enum class Direction { Forward, Backward };

std::string_view to_string(Direction direction);

using VarStore = std::map<std::string, std::string, std::less<>>;

/// What a primitive sees of the search while it runs.
struct OptionsView {
  std::size_t curr_sol = 0;  // 0-based index of the solution being completed
  std::size_t depth = 0;     // trail length
  Direction direction = Direction::Forward;
};

class Outcome {
 public:
  enum class Kind { Success, Failure, Error };

  static Outcome success() { return Outcome(Kind::Success, {}); }
  static Outcome failure() { return Outcome(Kind::Failure, {}); }
  static Outcome error(std::string message) { return Outcome(Kind::Error, std::move(message)); }

  Kind kind() const { return kind_; }
  bool ok() const { return kind_ == Kind::Success; }
  bool failed() const { return kind_ == Kind::Failure; }
  bool is_error() const { return kind_ == Kind::Error; }
  const std::string& message() const { return message_; }

  bool operator==(const Outcome&) const = default;

 private:
  Outcome(Kind kind, std::string message) : kind_(kind), message_(std::move(message)) {}

  Kind kind_;
  std::string message_;
};

// Thrown by a context to stop the whole search (e.g. depth limit). Not an
// std::exception so handler-level catch blocks and invoke() let it pass.
struct SearchInterrupted {};

/// The handler-facing side of a running search. The engine supplies one per
/// invocation; handlers must not keep it past their return.
class ExecutionContext {
 public:
  virtual ~ExecutionContext() = default;

  virtual Direction direction() const = 0;

  /// Throws UnboundVariable.
  virtual std::string read_var(std::string_view name) const = 0;
  virtual std::optional<std::string> find_var(std::string_view name) const = 0;

  /// Trailed: backtracking past the writing item restores the previous value.
  /// Throws WriteDuringBackward outside forward execution.
  virtual void write_var(std::string_view name, std::string value) = 0;

  virtual OptionsView current_options() const = 0;

  // Used by the host to make a failed invocation leave the store untouched.
  virtual std::size_t checkpoint() const = 0;
  virtual void rollback(std::size_t mark) = 0;

  void raise_failure() { failure_ = true; }
  bool failure_raised() const { return failure_; }
  void clear_failure() { failure_ = false; }

 private:
  bool failure_ = false;
};

/// A context over a private store, for driving primitives outside the engine.
class LocalContext : public ExecutionContext {
 public:
  explicit LocalContext(VarStore vars = {}) : vars_(std::move(vars)) {}

  void set_direction(Direction d) { direction_ = d; }
  void set_options(OptionsView o) { options_ = o; }
  const VarStore& vars() const { return vars_; }

  /// Restores the value overwritten by the most recent trailed write.
  void undo_last_write();
  std::size_t journal_size() const { return journal_.size(); }

  Direction direction() const override { return direction_; }
  std::string read_var(std::string_view name) const override;
  std::optional<std::string> find_var(std::string_view name) const override;
  void write_var(std::string_view name, std::string value) override;
  OptionsView current_options() const override;
  std::size_t checkpoint() const override { return journal_.size(); }
  void rollback(std::size_t mark) override;

 private:
  struct Write {
    std::string name;
    std::optional<std::string> previous;
  };

  VarStore vars_;
  std::vector<Write> journal_;
  Direction direction_ = Direction::Forward;
  OptionsView options_;
};

enum class ParamMode { In, Out };
enum class ParamKind { Text, Int };

struct ParamSpec {
  std::string name;
  ParamMode mode = ParamMode::In;
  ParamKind kind = ParamKind::Text;
};

enum class PrimitiveKind { Action, Test, Combined };

std::string_view to_string(PrimitiveKind kind);

/// Arguments of one call, resolved against the store. In values keep their
/// positional order among the In params; likewise for Out slots.
class BoundArgs {
 public:
  std::vector<std::string> in;
  std::vector<std::optional<std::int64_t>> in_int;  // set for Int params
  std::vector<std::string> out_slots;               // variable names
  std::vector<std::optional<std::string>> out_values;

  const std::string& text(std::size_t i) const { return in.at(i); }
  std::int64_t integer(std::size_t i) const;
  void set_output(std::size_t slot, std::string value) { out_values.at(slot) = std::move(value); }

  bool operator==(const BoundArgs&) const = default;
};

using Handler = std::function<Outcome(Direction, BoundArgs&, ExecutionContext&)>;

struct PrimitiveDef {
  std::string name;
  std::vector<ParamSpec> params;
  PrimitiveKind kind = PrimitiveKind::Action;
  Handler handler;

  std::size_t arity() const { return params.size(); }
};

class PrimitiveRegistry {
 public:
  /// Throws DuplicateName.
  void add(PrimitiveDef def);
  const PrimitiveDef* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PrimitiveDef, std::less<>> defs_;
};

inline void register_primitive(PrimitiveRegistry& registry, PrimitiveDef def) { registry.add(std::move(def)); }

/// Checks a call's shape against its definition; throws ModeMismatch or
/// LoadError (arity).
void check_call(const PrimitiveDef& def, const PrimitiveCall& call);

/// Throws UnboundVariable, TypeMismatch, ModeMismatch.
BoundArgs bind_args(const PrimitiveDef& def, const PrimitiveCall& call, const VarStore& store);

/// Runs one direction of a primitive. Backward on a test primitive is a host
/// no-op. Out slots are committed through ctx only on Success; any other
/// outcome leaves the store as it was.
Outcome invoke(const PrimitiveDef& def, Direction direction, BoundArgs& bound, ExecutionContext& ctx);

}  // namespace cnp
