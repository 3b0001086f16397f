#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cnp {

// Arguments as written on an arrow label.
struct LiteralText {
  std::string value;
  bool operator==(const LiteralText&) const = default;
};
struct LiteralInt {
  std::int64_t value = 0;
  bool operator==(const LiteralInt&) const = default;
};
/// `$name`: the current value of a variable.
struct VarIn {
  std::string name;
  bool operator==(const VarIn&) const = default;
};
/// `&name`: a slot the primitive writes on success.
struct VarOut {
  std::string name;
  bool operator==(const VarOut&) const = default;
};

using Arg = std::variant<LiteralText, LiteralInt, VarIn, VarOut>;

struct PrimitiveCall {
  std::string name;
  std::vector<Arg> args;
  bool operator==(const PrimitiveCall&) const = default;
};

struct SubnetCall {
  std::string name;
  bool operator==(const SubnetCall&) const = default;
};

using CallItem = std::variant<PrimitiveCall, SubnetCall>;

struct State {
  std::string name;
  std::optional<int> visit_limit;  // occurrences on the active path; empty = unlimited

  bool operator==(const State&) const = default;
};

struct Arrow {
  std::string from;
  std::string to;
  std::optional<int> range;  // concurrent forward traversals on the active path
  std::vector<CallItem> items;
  int line = 0;  // source line, 0 when built in memory; not part of equality

  bool operator==(const Arrow& other) const {
    return from == other.from && to == other.to && range == other.range && items == other.items;
  }
};

struct Subnet {
  std::string name;
  std::vector<State> states;
  std::string initial;
  std::vector<std::string> finals;
  std::vector<Arrow> arrows;

  // Final states compare as a set; their order carries no meaning.
  bool operator==(const Subnet& other) const;

  const State* find_state(std::string_view state) const;
  bool is_final(std::string_view state) const;
};

/// A control network: subnets in declaration order plus the name of the
/// subnet execution starts in.
struct ControlNetwork {
  std::vector<Subnet> subnets;
  std::string main = "main";

  bool operator==(const ControlNetwork&) const = default;

  const Subnet* find_subnet(std::string_view name) const;
};

enum class Rule {
  NoMain,
  DuplicateSubnet,
  DuplicateState,
  BadName,
  NoInitial,
  InitialNotState,
  NoFinal,
  FinalNotState,
  ArrowEndpoint,
  UnknownSubnet,
  BadVisitLimit,
  BadRange,
};

/// Rule ids as printed by the CLI (`NO_FINAL`, `UNKNOWN_SUBNET`, ...).
std::string_view rule_id(Rule rule);

struct Diagnostic {
  Rule rule;
  std::string subnet;             // empty for network-level rules
  std::optional<std::size_t> arrow;  // arrow index within the subnet, when relevant
  int line = 0;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& diagnostic);

bool is_identifier(std::string_view text);

/// Checks every structural invariant of the network. Pure; an empty result
/// means the network is well formed.
std::vector<Diagnostic> validate(const ControlNetwork& net);

}  // namespace cnp
