#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "cnp/error.hpp"
#include "cnp/foreign.hpp"
#include "cnp/natives.hpp"

namespace cnp {

namespace {

const std::vector<std::string> kMonkeyBanana{"Init", "At", "Walk", "Push", "Climb", "Print"};
const std::vector<std::string> kFileBacked{"InitFile", "AtFile", "WalkFile", "PushFile", "ClimbFile", "PrintFile"};
const std::vector<std::string> kBmi{"BmiW", "BmiWO", "GetValues", "BmiCalc", "BmiResult"};
const std::vector<std::string> kGeneric{"Echo", "Set", "Eq", "Fail"};

bool contains(const std::vector<std::string>& v, std::string_view name) {
  return std::find(v.begin(), v.end(), name) != v.end();
}

ParamSpec in_text(std::string name) { return {std::move(name), ParamMode::In, ParamKind::Text}; }
ParamSpec in_int(std::string name) { return {std::move(name), ParamMode::In, ParamKind::Int}; }
ParamSpec out_text(std::string name) { return {std::move(name), ParamMode::Out, ParamKind::Text}; }

// Monkey and Banana over the shared scratch files, the layout foreign
// primitives use: positions.txt holds "<monkey> <box>", steps.txt the journal.
class FileBackedMonkeyBanana {
 public:
  FileBackedMonkeyBanana(Console console, std::filesystem::path dir)
      : console_(console), positions_(dir / "positions.txt"), steps_(dir / "steps.txt") {}

  Outcome init(Direction d, ExecutionContext& ctx) {
    if (d == Direction::Backward) return Outcome::success();
    auto [monkey, box] = read_initial_places(console_, ctx);
    scratch_write_positions(positions_, monkey, box);
    std::ofstream truncate(steps_, std::ios::trunc);
    if (!truncate) throw IoError("cannot write " + steps_.string());
    return Outcome::success();
  }

  Outcome at(std::string_view place) const {
    return scratch_read_positions(positions_).first == place ? Outcome::success() : Outcome::failure();
  }

  Outcome walk(Direction d, const std::string& from, const std::string& to) {
    auto [monkey, box] = scratch_read_positions(positions_);
    if (d == Direction::Forward) {
      scratch_write_positions(positions_, to, box);
      scratch_append_step(steps_, "Walk: " + from + "->" + to);
    } else {
      scratch_pop_step(steps_);
      scratch_write_positions(positions_, from, box);
    }
    return Outcome::success();
  }

  Outcome push(Direction d, const std::string& from, const std::string& to) {
    const std::string step = "Push: " + from + "->" + to;
    if (d == Direction::Forward) {
      auto [monkey, box] = scratch_read_positions(positions_);
      if (box != from || monkey != from) return Outcome::failure();
      scratch_write_positions(positions_, to, to);
      scratch_append_step(steps_, step);
    } else if (scratch_pop_step(steps_) == step) {
      scratch_write_positions(positions_, from, from);
    }
    return Outcome::success();
  }

  Outcome climb(Direction d) {
    if (d == Direction::Backward) {
      scratch_pop_step(steps_);
      return Outcome::success();
    }
    auto [monkey, box] = scratch_read_positions(positions_);
    if (monkey != box) return Outcome::failure();
    scratch_append_step(steps_, "Climb");
    return Outcome::success();
  }

  Outcome print(Direction d, ExecutionContext& ctx) {
    if (d == Direction::Backward || !console_.out) return Outcome::success();
    *console_.out << "Solution: " << ctx.current_options().curr_sol + 1 << '\n';
    for (const auto& line : scratch_read_steps(steps_)) *console_.out << line << '\n';
    *console_.out << std::flush;
    return Outcome::success();
  }

 private:
  Console console_;
  std::filesystem::path positions_;
  std::filesystem::path steps_;
};

std::string prompt_line(const Console& console, std::string_view prompt) {
  if (console.out) *console.out << prompt << std::flush;
  std::string answer;
  if (!console.in || !std::getline(*console.in, answer)) throw Error("no answer to \"" + std::string(prompt) + "\"");
  if (!answer.empty() && answer.back() == '\r') answer.pop_back();
  if (console.out) *console.out << '\n';
  return answer;
}

std::int64_t to_int(const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw TypeMismatch("expected an integer, got \"" + text + "\"");
  return v;
}

void print_reading(const Console& console, const BmiReading& r) {
  if (!console.out) return;
  *console.out << "Your BMI result is: " << format_bmi(r.bmi) << ". You are: " << to_string(r.category) << '\n'
               << std::flush;
}

void add_file_backed(PrimitiveRegistry& registry, const std::vector<std::string>& names, const NativeEnvironment& env) {
  auto pack = std::make_shared<FileBackedMonkeyBanana>(env.console, env.scratch_dir);
  const std::vector<ParamSpec> places{in_text("from"), in_text("to")};
  for (const auto& name : names) {
    if (name == "InitFile")
      registry.add({name, {}, PrimitiveKind::Action,
                    [pack](Direction d, BoundArgs&, ExecutionContext& c) { return pack->init(d, c); }});
    else if (name == "AtFile")
      registry.add({name, {in_text("place")}, PrimitiveKind::Test,
                    [pack](Direction, BoundArgs& a, ExecutionContext&) { return pack->at(a.text(0)); }});
    else if (name == "WalkFile")
      registry.add({name, places, PrimitiveKind::Action, [pack](Direction d, BoundArgs& a, ExecutionContext&) {
                      return pack->walk(d, a.text(0), a.text(1));
                    }});
    else if (name == "PushFile")
      registry.add({name, places, PrimitiveKind::Combined, [pack](Direction d, BoundArgs& a, ExecutionContext&) {
                      return pack->push(d, a.text(0), a.text(1));
                    }});
    else if (name == "ClimbFile")
      registry.add({name, {}, PrimitiveKind::Combined,
                    [pack](Direction d, BoundArgs&, ExecutionContext&) { return pack->climb(d); }});
    else if (name == "PrintFile")
      registry.add({name, {}, PrimitiveKind::Action,
                    [pack](Direction d, BoundArgs&, ExecutionContext& c) { return pack->print(d, c); }});
  }
}

void add_bmi(PrimitiveRegistry& registry, const std::vector<std::string>& names, const NativeEnvironment& env) {
  const Console console = env.console;
  for (const auto& name : names) {
    if (name == "BmiW") {
      registry.add({name, {in_int("kg"), in_int("cm")}, PrimitiveKind::Action,
                    [console](Direction d, BoundArgs& a, ExecutionContext&) {
                      if (d == Direction::Forward) print_reading(console, classify_bmi(a.integer(0), a.integer(1)));
                      return Outcome::success();
                    }});
    } else if (name == "BmiWO") {
      registry.add({name, {}, PrimitiveKind::Action, [console](Direction d, BoundArgs&, ExecutionContext&) {
                      if (d == Direction::Backward) return Outcome::success();
                      auto kg = to_int(prompt_line(console, "Please insert your weight in kg: "));
                      auto cm = to_int(prompt_line(console, "Please insert your height in cm: "));
                      print_reading(console, classify_bmi(kg, cm));
                      return Outcome::success();
                    }});
    } else if (name == "GetValues") {
      registry.add({name, {out_text("kg"), out_text("cm")}, PrimitiveKind::Action,
                    [console](Direction d, BoundArgs& a, ExecutionContext& ctx) {
                      if (d == Direction::Backward) return Outcome::success();
                      auto kg = ctx.find_var(a.out_slots[0]);
                      if (!kg) kg = prompt_line(console, "Please insert your weight: ");
                      auto cm = ctx.find_var(a.out_slots[1]);
                      if (!cm) cm = prompt_line(console, "Please insert your height: ");
                      a.set_output(0, *kg);
                      a.set_output(1, *cm);
                      return Outcome::success();
                    }});
    } else if (name == "BmiCalc") {
      registry.add({name, {in_int("kg"), in_int("cm"), out_text("res")}, PrimitiveKind::Action,
                    [](Direction d, BoundArgs& a, ExecutionContext&) {
                      if (d == Direction::Forward) a.set_output(0, format_bmi(classify_bmi(a.integer(0), a.integer(1)).bmi));
                      return Outcome::success();
                    }});
    } else if (name == "BmiResult") {
      registry.add({name, {in_text("res")}, PrimitiveKind::Action,
                    [console](Direction d, BoundArgs& a, ExecutionContext&) {
                      if (d == Direction::Backward) return Outcome::success();
                      double bmi = 0;
                      try {
                        std::size_t used = 0;
                        bmi = std::stod(a.text(0), &used);
                        if (used != a.text(0).size()) throw std::invalid_argument("trailing text");
                      } catch (const std::exception&) {
                        return Outcome::error("BmiResult: \"" + a.text(0) + "\" is not a number");
                      }
                      print_reading(console, BmiReading{bmi, classify_bmi_value(bmi)});
                      return Outcome::success();
                    }});
    }
  }
}

void add_generic(PrimitiveRegistry& registry, const std::vector<std::string>& names, const NativeEnvironment& env) {
  const Console console = env.console;
  for (const auto& name : names) {
    if (name == "Echo")
      registry.add({name, {in_text("text")}, PrimitiveKind::Action, [console](Direction d, BoundArgs& a, ExecutionContext&) {
                      if (d == Direction::Forward && console.out) *console.out << a.text(0) << '\n';
                      return Outcome::success();
                    }});
    else if (name == "Set")
      registry.add({name, {out_text("var"), in_text("value")}, PrimitiveKind::Action,
                    [](Direction d, BoundArgs& a, ExecutionContext&) {
                      if (d == Direction::Forward) a.set_output(0, a.text(0));
                      return Outcome::success();
                    }});
    else if (name == "Eq")
      registry.add({name, {in_text("a"), in_text("b")}, PrimitiveKind::Test, [](Direction, BoundArgs& a, ExecutionContext&) {
                      return a.text(0) == a.text(1) ? Outcome::success() : Outcome::failure();
                    }});
    else if (name == "Fail")
      registry.add({name, {}, PrimitiveKind::Test,
                    [](Direction, BoundArgs&, ExecutionContext&) { return Outcome::failure(); }});
  }
}

}  // namespace

std::vector<std::string> native_names() {
  std::vector<std::string> out;
  for (const auto* group : {&kMonkeyBanana, &kFileBacked, &kBmi, &kGeneric}) out.insert(out.end(), group->begin(), group->end());
  return out;
}

void add_natives(PrimitiveRegistry& registry, const std::vector<std::string>& names, const NativeEnvironment& env) {
  std::vector<std::string> mb, file, bmi, generic;
  for (const auto& name : names) {
    if (contains(kMonkeyBanana, name)) mb.push_back(name);
    else if (contains(kFileBacked, name)) file.push_back(name);
    else if (contains(kBmi, name)) bmi.push_back(name);
    else if (contains(kGeneric, name)) generic.push_back(name);
    else throw ManifestError("unknown native primitive '" + name + "'");
  }
  if (!mb.empty()) MonkeyBanana::register_all(std::make_shared<MonkeyBanana>(env.console), registry, mb);
  if (!file.empty()) add_file_backed(registry, file, env);
  if (!bmi.empty()) add_bmi(registry, bmi, env);
  if (!generic.empty()) add_generic(registry, generic, env);
}

}  // namespace cnp
