#include "cnp/primitives.hpp"

#include <charconv>

#include "cnp/error.hpp"

namespace cnp {

std::string_view to_string(Direction direction) {
  return direction == Direction::Forward ? "forward" : "backward";
}

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Action: return "action";
    case PrimitiveKind::Test: return "test";
    case PrimitiveKind::Combined: return "combined";
  }
  return "action";
}

// LocalContext

void LocalContext::undo_last_write() {
  if (journal_.empty()) return;
  Write w = std::move(journal_.back());
  journal_.pop_back();
  if (w.previous)
    vars_.insert_or_assign(w.name, std::move(*w.previous));
  else
    vars_.erase(w.name);
}

std::string LocalContext::read_var(std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw UnboundVariable(std::string(name));
  return it->second;
}

std::optional<std::string> LocalContext::find_var(std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) return std::nullopt;
  return it->second;
}

void LocalContext::write_var(std::string_view name, std::string value) {
  if (direction_ != Direction::Forward) throw WriteDuringBackward(std::string(name));
  journal_.push_back(Write{std::string(name), find_var(name)});
  vars_.insert_or_assign(std::string(name), std::move(value));
}

OptionsView LocalContext::current_options() const {
  OptionsView o = options_;
  o.direction = direction_;
  return o;
}

void LocalContext::rollback(std::size_t mark) {
  while (journal_.size() > mark) undo_last_write();
}

// BoundArgs

std::int64_t BoundArgs::integer(std::size_t i) const {
  const auto& v = in_int.at(i);
  if (!v) throw TypeMismatch("argument " + std::to_string(i + 1) + " is not declared as an integer");
  return *v;
}

// Registry

void PrimitiveRegistry::add(PrimitiveDef def) {
  if (defs_.count(def.name)) throw DuplicateName(def.name);
  std::string key = def.name;
  defs_.emplace(std::move(key), std::move(def));
}

const PrimitiveDef* PrimitiveRegistry::find(std::string_view name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

std::vector<std::string> PrimitiveRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(defs_.size());
  for (const auto& [name, def] : defs_) out.push_back(name);
  return out;
}

// Binding

void check_call(const PrimitiveDef& def, const PrimitiveCall& call) {
  if (call.args.size() != def.arity())
    throw LoadError("primitive '" + def.name + "' takes " + std::to_string(def.arity()) + " argument(s), " +
                    std::to_string(call.args.size()) + " given");
  for (std::size_t i = 0; i < def.params.size(); ++i) {
    const bool writable = def.params[i].mode == ParamMode::Out;
    const bool is_slot = std::holds_alternative<VarOut>(call.args[i]);
    if (writable && !is_slot)
      throw ModeMismatch("argument " + std::to_string(i + 1) + " of '" + def.name +
                         "' is an output and must be written as &name");
    if (!writable && is_slot)
      throw ModeMismatch("argument " + std::to_string(i + 1) + " of '" + def.name + "' is not writable");
  }
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return v;
}

}  // namespace

BoundArgs bind_args(const PrimitiveDef& def, const PrimitiveCall& call, const VarStore& store) {
  check_call(def, call);
  BoundArgs bound;
  for (std::size_t i = 0; i < def.params.size(); ++i) {
    const ParamSpec& param = def.params[i];
    const Arg& arg = call.args[i];
    if (param.mode == ParamMode::Out) {
      bound.out_slots.push_back(std::get<VarOut>(arg).name);
      bound.out_values.emplace_back();
      continue;
    }
    std::string value;
    if (const auto* t = std::get_if<LiteralText>(&arg)) {
      value = t->value;
    } else if (const auto* n = std::get_if<LiteralInt>(&arg)) {
      value = std::to_string(n->value);
    } else {
      const auto& name = std::get<VarIn>(arg).name;
      auto it = store.find(name);
      if (it == store.end()) throw UnboundVariable(name);
      value = it->second;
    }
    std::optional<std::int64_t> as_int;
    if (param.kind == ParamKind::Int) {
      as_int = parse_int(value);
      if (!as_int)
        throw TypeMismatch("argument " + std::to_string(i + 1) + " of '" + def.name + "' expects an integer, got \"" +
                           value + "\"");
    }
    bound.in.push_back(std::move(value));
    bound.in_int.push_back(as_int);
  }
  return bound;
}

Outcome invoke(const PrimitiveDef& def, Direction direction, BoundArgs& bound, ExecutionContext& ctx) {
  if (direction == Direction::Backward && def.kind == PrimitiveKind::Test) return Outcome::success();

  const std::size_t mark = ctx.checkpoint();
  ctx.clear_failure();
  Outcome outcome = Outcome::success();
  try {
    outcome = def.handler(direction, bound, ctx);
  } catch (const std::exception& e) {
    outcome = Outcome::error(e.what());
  }
  if (outcome.ok() && ctx.failure_raised()) outcome = Outcome::failure();
  ctx.clear_failure();

  if (outcome.failed() && direction == Direction::Backward)
    outcome = Outcome::error("primitive '" + def.name + "' reported failure during backward execution");

  if (outcome.ok() && direction == Direction::Forward) {
    try {
      for (std::size_t i = 0; i < bound.out_slots.size(); ++i)
        if (bound.out_values[i]) ctx.write_var(bound.out_slots[i], *bound.out_values[i]);
    } catch (const std::exception& e) {
      outcome = Outcome::error(e.what());
    }
  }

  if (!outcome.ok() && direction == Direction::Forward) ctx.rollback(mark);
  return outcome;
}

}  // namespace cnp
