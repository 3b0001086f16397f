#include <algorithm>
#include <istream>
#include <ostream>

#include "cnp/error.hpp"
#include "cnp/natives.hpp"

namespace cnp {

namespace {

constexpr std::string_view kMonkeyPrompt = "Where is the Monkey? [Door/Window] Sorry, it cannot be at 'Middle'";
constexpr std::string_view kBoxPrompt = "Where is the Box? [Door/Window/Middle]";

bool is_monkey_start(std::string_view p) { return p == "Door" || p == "Window"; }
bool is_place(std::string_view p) { return p == "Door" || p == "Window" || p == "Middle"; }

std::string ask(const Console& console, std::string_view prompt, bool (*valid)(std::string_view)) {
  for (;;) {
    if (console.out) *console.out << prompt << '\n' << std::flush;
    std::string answer;
    if (!console.in || !std::getline(*console.in, answer)) throw Error("no answer to \"" + std::string(prompt) + "\"");
    if (!answer.empty() && answer.back() == '\r') answer.pop_back();
    if (valid(answer)) return answer;
    if (console.out) *console.out << "Sorry, '" << answer << "' is not a valid place\n";
  }
}

}  // namespace

std::pair<std::string, std::string> read_initial_places(const Console& console, const ExecutionContext& ctx) {
  std::string monkey;
  std::string box;
  if (auto m = ctx.find_var("Monkey")) {
    if (*m == "Middle") throw Error("Sorry, it cannot be at 'Middle'");
    if (!is_monkey_start(*m)) throw Error("invalid monkey position '" + *m + "'");
    monkey = *m;
  } else {
    monkey = ask(console, kMonkeyPrompt, is_monkey_start);
  }
  if (auto b = ctx.find_var("Box")) {
    if (!is_place(*b)) throw Error("invalid box position '" + *b + "'");
    box = *b;
  } else {
    box = ask(console, kBoxPrompt, is_place);
  }
  return {monkey, box};
}

void MonkeyBanana::record(std::string step) {
  ++state_.step_ptr;
  if (state_.steps.size() <= state_.step_ptr) state_.steps.resize(state_.step_ptr + 1);
  state_.steps[state_.step_ptr] = std::move(step);
}

Outcome MonkeyBanana::init(Direction direction, ExecutionContext& ctx) {
  if (direction == Direction::Backward) {
    state_ = MbState{};
    return Outcome::success();
  }
  auto [monkey, box] = read_initial_places(console_, ctx);
  state_ = MbState{std::move(monkey), std::move(box), 0, {""}};
  return Outcome::success();
}

Outcome MonkeyBanana::at(std::string_view place) const {
  return state_.monkey_pos == place ? Outcome::success() : Outcome::failure();
}

Outcome MonkeyBanana::walk(Direction direction, const std::string& from, const std::string& to) {
  if (direction == Direction::Forward) {
    record("Walk: " + from + "->" + to);
    state_.monkey_pos = to;
  } else {
    --state_.step_ptr;
    state_.monkey_pos = from;
  }
  return Outcome::success();
}

Outcome MonkeyBanana::push(Direction direction, const std::string& from, const std::string& to) {
  const std::string step = "Push: " + from + "->" + to;
  if (direction == Direction::Forward) {
    if (state_.box_pos != from || state_.monkey_pos != from) return Outcome::failure();
    record(step);
    state_.box_pos = to;
    state_.monkey_pos = to;
  } else {
    if (state_.step_ptr < state_.steps.size() && state_.steps[state_.step_ptr] == step) {
      state_.box_pos = from;
      state_.monkey_pos = from;
    }
    --state_.step_ptr;
  }
  return Outcome::success();
}

Outcome MonkeyBanana::climb(Direction direction) {
  if (direction == Direction::Forward) {
    if (state_.box_pos != state_.monkey_pos) return Outcome::failure();
    record("Climb");
  } else {
    --state_.step_ptr;
  }
  return Outcome::success();
}

Outcome MonkeyBanana::print(Direction direction, ExecutionContext& ctx) {
  if (direction == Direction::Backward || !console_.out) return Outcome::success();
  std::ostream& out = *console_.out;
  out << "Solution: " << ctx.current_options().curr_sol + 1 << '\n';
  for (std::size_t i = 1; i <= state_.step_ptr; ++i) out << state_.steps[i] << '\n';
  out << std::flush;
  return Outcome::success();
}

void MonkeyBanana::register_all(const std::shared_ptr<MonkeyBanana>& pack, PrimitiveRegistry& registry,
                                const std::vector<std::string>& only) {
  auto wanted = [&](std::string_view name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  const std::vector<ParamSpec> places{{"from", ParamMode::In, ParamKind::Text}, {"to", ParamMode::In, ParamKind::Text}};

  if (wanted("Init"))
    registry.add({"Init", {}, PrimitiveKind::Action,
                  [pack](Direction d, BoundArgs&, ExecutionContext& ctx) { return pack->init(d, ctx); }});
  if (wanted("At"))
    registry.add({"At", {{"place", ParamMode::In, ParamKind::Text}}, PrimitiveKind::Test,
                  [pack](Direction, BoundArgs& a, ExecutionContext&) { return pack->at(a.text(0)); }});
  if (wanted("Walk"))
    registry.add({"Walk", places, PrimitiveKind::Action, [pack](Direction d, BoundArgs& a, ExecutionContext&) {
                    return pack->walk(d, a.text(0), a.text(1));
                  }});
  if (wanted("Push"))
    registry.add({"Push", places, PrimitiveKind::Combined, [pack](Direction d, BoundArgs& a, ExecutionContext&) {
                    return pack->push(d, a.text(0), a.text(1));
                  }});
  if (wanted("Climb"))
    registry.add({"Climb", {}, PrimitiveKind::Combined,
                  [pack](Direction d, BoundArgs&, ExecutionContext&) { return pack->climb(d); }});
  if (wanted("Print"))
    registry.add({"Print", {}, PrimitiveKind::Action,
                  [pack](Direction d, BoundArgs&, ExecutionContext& ctx) { return pack->print(d, ctx); }});
}

}  // namespace cnp
