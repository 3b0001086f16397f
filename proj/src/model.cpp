#include "cnp/model.hpp"

#include <algorithm>
#include <set>

namespace cnp {

bool Subnet::operator==(const Subnet& other) const {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  return name == other.name && states == other.states && initial == other.initial && arrows == other.arrows &&
         sorted(finals) == sorted(other.finals);
}

const State* Subnet::find_state(std::string_view state) const {
  auto it = std::find_if(states.begin(), states.end(), [&](const State& s) { return s.name == state; });
  return it == states.end() ? nullptr : &*it;
}

bool Subnet::is_final(std::string_view state) const {
  return std::find(finals.begin(), finals.end(), state) != finals.end();
}

const Subnet* ControlNetwork::find_subnet(std::string_view name) const {
  auto it = std::find_if(subnets.begin(), subnets.end(), [&](const Subnet& s) { return s.name == name; });
  return it == subnets.end() ? nullptr : &*it;
}

std::string_view rule_id(Rule rule) {
  switch (rule) {
    case Rule::NoMain: return "NO_MAIN";
    case Rule::DuplicateSubnet: return "DUPLICATE_SUBNET";
    case Rule::DuplicateState: return "DUPLICATE_STATE";
    case Rule::BadName: return "BAD_NAME";
    case Rule::NoInitial: return "NO_INITIAL";
    case Rule::InitialNotState: return "INITIAL_NOT_STATE";
    case Rule::NoFinal: return "NO_FINAL";
    case Rule::FinalNotState: return "FINAL_NOT_STATE";
    case Rule::ArrowEndpoint: return "ARROW_ENDPOINT";
    case Rule::UnknownSubnet: return "UNKNOWN_SUBNET";
    case Rule::BadVisitLimit: return "BAD_VISIT_LIMIT";
    case Rule::BadRange: return "BAD_RANGE";
  }
  return "UNKNOWN";
}

std::string to_string(const Diagnostic& d) {
  std::string out(rule_id(d.rule));
  if (!d.subnet.empty()) {
    out += " [net " + d.subnet;
    if (d.arrow) out += ", arrow " + std::to_string(*d.arrow);
    out += "]";
  }
  if (d.line > 0) out += " (line " + std::to_string(d.line) + ")";
  out += ": " + d.message;
  return out;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(text.front())) return false;
  return std::all_of(text.begin() + 1, text.end(), [&](char c) { return alpha(c) || digit(c); });
}

namespace {

void check_subnet(const ControlNetwork& net, const Subnet& sn, std::vector<Diagnostic>& out) {
  auto report = [&](Rule rule, std::optional<std::size_t> arrow, int line, std::string message) {
    out.push_back(Diagnostic{rule, sn.name, arrow, line, std::move(message)});
  };

  std::set<std::string_view> seen;
  for (const auto& st : sn.states) {
    if (!is_identifier(st.name)) report(Rule::BadName, std::nullopt, 0, "invalid state name '" + st.name + "'");
    if (!seen.insert(st.name).second) report(Rule::DuplicateState, std::nullopt, 0, "state '" + st.name + "' declared twice");
    if (st.visit_limit && *st.visit_limit < 1)
      report(Rule::BadVisitLimit, std::nullopt, 0, "state '" + st.name + "' has visit limit below 1");
  }

  if (sn.initial.empty())
    report(Rule::NoInitial, std::nullopt, 0, "subnet has no initial state");
  else if (!sn.find_state(sn.initial))
    report(Rule::InitialNotState, std::nullopt, 0, "initial state '" + sn.initial + "' is not declared");

  if (sn.finals.empty()) report(Rule::NoFinal, std::nullopt, 0, "subnet has no final state");
  for (const auto& f : sn.finals)
    if (!sn.find_state(f)) report(Rule::FinalNotState, std::nullopt, 0, "final state '" + f + "' is not declared");

  for (std::size_t i = 0; i < sn.arrows.size(); ++i) {
    const Arrow& a = sn.arrows[i];
    if (!sn.find_state(a.from))
      report(Rule::ArrowEndpoint, i, a.line, "arrow source '" + a.from + "' is not a state");
    if (!sn.find_state(a.to)) report(Rule::ArrowEndpoint, i, a.line, "arrow target '" + a.to + "' is not a state");
    if (a.range && *a.range < 1) report(Rule::BadRange, i, a.line, "arrow range below 1");
    for (const auto& item : a.items) {
      if (const auto* call = std::get_if<SubnetCall>(&item)) {
        if (!net.find_subnet(call->name))
          report(Rule::UnknownSubnet, i, a.line, "call to unknown subnet '" + call->name + "'");
      } else {
        const auto& prim = std::get<PrimitiveCall>(item);
        if (!is_identifier(prim.name))
          report(Rule::BadName, i, a.line, "invalid primitive name '" + prim.name + "'");
      }
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const ControlNetwork& net) {
  std::vector<Diagnostic> out;
  if (!net.find_subnet(net.main))
    out.push_back(Diagnostic{Rule::NoMain, "", std::nullopt, 0, "no subnet named '" + net.main + "'"});

  std::set<std::string_view> names;
  for (const auto& sn : net.subnets) {
    if (!is_identifier(sn.name))
      out.push_back(Diagnostic{Rule::BadName, sn.name, std::nullopt, 0, "invalid subnet name '" + sn.name + "'"});
    if (!names.insert(sn.name).second)
      out.push_back(Diagnostic{Rule::DuplicateSubnet, sn.name, std::nullopt, 0, "subnet declared twice"});
  }
  for (const auto& sn : net.subnets) check_subnet(net, sn, out);
  return out;
}

}  // namespace cnp
