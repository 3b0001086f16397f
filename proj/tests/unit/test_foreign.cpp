#include "doctest.h"
#include "helpers.hpp"

#include <chrono>
#include <thread>

#include "cnp/error.hpp"
#include "cnp/foreign.hpp"
#include "cnp/natives.hpp"

using namespace cnp;
using Argv = std::vector<std::string>;

namespace {

Argv worker(std::initializer_list<std::string> rest) {
  Argv argv{testutil::cnp_binary().string(), "fixture-worker"};
  argv.insert(argv.end(), rest);
  return argv;
}

ForeignPrimitiveSpec echo_test(std::string name) {
  ForeignPrimitiveSpec s;
  s.name = std::move(name);
  s.params = {{"x", ParamMode::In, ParamKind::Text}};
  s.kind = PrimitiveKind::Test;
  s.forward_cmd = worker({"echo", "{1}"});
  s.capture = CaptureMode::FirstLine;
  s.test_map = TestMap{"yes", "no"};
  return s;
}

std::pair<long long, long long> marker_times(const std::filesystem::path& p) {
  long long start = -1, stop = -1;
  std::istringstream in(testutil::slurp(p));
  std::string word;
  long long t = 0;
  while (in >> word >> t) (word == "start" ? start : stop) = t;
  return {start, stop};
}

bool wait_for_stop(const std::filesystem::path& p, std::chrono::milliseconds limit) {
  auto until = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < until) {
    if (marker_times(p).second >= 0) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

}  // namespace

TEST_CASE("render_command substitutes placeholders inside tokens") {
  CHECK(render_command({"python3", "walk.py", "{1}", "{2}"}, {"Door", "Window"}) ==
        Argv{"python3", "walk.py", "Door", "Window"});
  CHECK(render_command({"--from={1}", "{2}{1}"}, {"a", "b"}) == Argv{"--from=a", "ba"});
  CHECK(render_command({"{1}"}, {"two words"}) == Argv{"two words"});
  CHECK(render_command({"{x}", "{}", "{"}, {}) == Argv{"{x}", "{}", "{"});
  CHECK(render_command({"{1}"}, {"{2}"}) == Argv{"{2}"});
  CHECK_THROWS_AS(render_command({"{3}"}, {"a", "b"}), PlaceholderOutOfRange);
  CHECK_THROWS_AS(render_command({"{0}"}, {"a"}), PlaceholderOutOfRange);
}

TEST_CASE("split_command splits on blanks only") {
  CHECK(split_command("  python3\tbmi_calc.py {1}  {2} ") == Argv{"python3", "bmi_calc.py", "{1}", "{2}"});
  CHECK(split_command("").empty());
  CHECK(split_command("'a b'") == Argv{"'a", "b'"});
}

TEST_CASE("run_sync captures worker output") {
  auto out = run_sync(worker({"echo", "A", "B"}));
  CHECK(out.exit_code == 0);
  CHECK(out.lines == Argv{"A B"});

  auto first = run_sync(worker({"first-line", "one", "two", "three"}), {{}, CaptureMode::FirstLine});
  CHECK(first.lines == Argv{"one"});
  auto all = run_sync(worker({"first-line", "one", "two"}), {{}, CaptureMode::AllLines});
  CHECK(all.lines == Argv{"one", "two"});
  auto none = run_sync(worker({"first-line", "one"}), {{}, CaptureMode::None});
  CHECK(none.lines.empty());

  CHECK(run_sync(worker({"exit-7"})).exit_code == 7);
  CHECK(run_sync(worker({"no-such-mode"})).exit_code == 64);
}

TEST_CASE("each rendered value stays one argv element") {
  for (const std::string v : {"a b c", "", "  ", "$HOME", "x;y", "'q'", "\"d\"", "tab\there"}) {
    CAPTURE(v);
    auto argv = render_command(worker({"argv-count", "{1}", "{2}"}), {v, "z"});
    CHECK(run_sync(argv).lines == Argv{"2"});
    auto echoed = run_sync(render_command(worker({"first-line", "{1}"}), {v}), {{}, CaptureMode::AllLines});
    if (v.find('\n') == std::string::npos) CHECK(echoed.lines == Argv{v});
  }
}

TEST_CASE("run_sync reports spawn and decode errors") {
  CHECK_THROWS_AS(run_sync({"/definitely/not/here"}), SpawnError);
  CHECK_THROWS_AS(run_sync({"cnp-no-such-program-on-path"}), SpawnError);
  CHECK_THROWS_AS(run_sync({}), SpawnError);
  CHECK_THROWS_AS(run_sync({"printf", "\\377\\n"}), DecodeError);
}

TEST_CASE("run_sync honours the working directory") {
  testutil::TempDir dir;
  auto out = run_sync({"pwd"}, {dir.path(), CaptureMode::FirstLine});
  CHECK(std::filesystem::equivalent(out.lines.at(0), dir.path()));
}

TEST_CASE("spawn_detached returns before the child finishes") {
  testutil::TempDir dir;
  auto marker = dir / "m1";
  auto t0 = std::chrono::steady_clock::now();
  spawn_detached(worker({"sleep-then-exit", "600", marker.string()}));
  auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(elapsed < std::chrono::milliseconds(400));
  REQUIRE(wait_for_stop(marker, std::chrono::seconds(10)));
  CHECK_THROWS_AS(spawn_detached({"/definitely/not/here"}), SpawnError);
}

TEST_CASE("two detached children run concurrently") {
  testutil::TempDir dir;
  auto a = dir / "a";
  auto b = dir / "b";
  spawn_detached(worker({"sleep-then-exit", "500", a.string()}));
  spawn_detached(worker({"sleep-then-exit", "500", b.string()}));
  REQUIRE(wait_for_stop(a, std::chrono::seconds(10)));
  REQUIRE(wait_for_stop(b, std::chrono::seconds(10)));
  auto [a0, a1] = marker_times(a);
  auto [b0, b1] = marker_times(b);
  CHECK(a0 < b1);
  CHECK(b0 < a1);
}

TEST_CASE("interpret_outcome maps tokens, exit codes and result slots") {
  ForeignPrimitiveSpec s;
  s.name = "T";
  s.kind = PrimitiveKind::Test;
  s.forward_cmd = {"x"};
  s.capture = CaptureMode::FirstLine;
  s.test_map = TestMap{};
  CHECK(interpret_outcome(s, {{"1"}, 0}).ok());
  CHECK(interpret_outcome(s, {{"0"}, 0}).failed());
  auto maybe = interpret_outcome(s, {{"maybe"}, 0});
  CHECK(maybe.is_error());
  CHECK(maybe.message().find("protocol error") != std::string::npos);
  CHECK(interpret_outcome(s, {{}, 0}).is_error());
  CHECK(interpret_outcome(s, {{"1"}, 3}).is_error());

  ForeignPrimitiveSpec r;
  r.name = "R";
  r.params = {{"a", ParamMode::In, ParamKind::Text}, {"out", ParamMode::Out, ParamKind::Text}};
  r.forward_cmd = {"x"};
  r.capture = CaptureMode::FirstLine;
  r.result_slot = 0;
  BoundArgs b;
  b.out_slots = {"res"};
  b.out_values = {std::nullopt};
  CHECK(interpret_outcome(r, {{"22.857143"}, 0}, &b).ok());
  CHECK(b.out_values[0] == "22.857143");
  CHECK(interpret_outcome(r, {{}, 0}, &b).is_error());
}

TEST_CASE("check_spec rejects inconsistent specs") {
  auto base = [] {
    ForeignPrimitiveSpec s;
    s.name = "F";
    s.forward_cmd = {"x"};
    return s;
  };
  CHECK_NOTHROW(check_spec(base()));

  auto s = base();
  s.forward_cmd.clear();
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.wait = WaitMode::Detached;
  s.capture = CaptureMode::FirstLine;
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.wait = WaitMode::Detached;
  s.backward_cmd = Argv{"y"};
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.test_map = TestMap{};
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.capture = CaptureMode::FirstLine;
  s.result_slot = 0;
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.undo_on_failure = true;
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.kind = PrimitiveKind::Test;
  s.backward_cmd = Argv{"y"};
  CHECK_THROWS_AS(check_spec(s), ManifestError);

  s = base();
  s.params = {{"a", ParamMode::In, ParamKind::Text}};
  s.forward_cmd = {"x", "{2}"};
  CHECK_THROWS_AS(check_spec(s), ManifestError);
}

TEST_CASE("scratch files") {
  testutil::TempDir dir;
  auto pos = dir / "positions.txt";
  auto steps = dir / "steps.txt";
  scratch_write_positions(pos, "Door", "Window");
  CHECK(testutil::slurp(pos) == "Door Window\n");
  CHECK(scratch_read_positions(pos) == std::pair<std::string, std::string>{"Door", "Window"});
  CHECK_THROWS_AS(scratch_read_positions(dir / "missing.txt"), IoError);

  CHECK_THROWS_AS(scratch_pop_step(steps), Error);
  std::ofstream(steps).close();
  CHECK_THROWS_AS(scratch_pop_step(steps), EmptyJournal);

  for (int k = 1; k <= 6; ++k) {
    for (int i = 0; i < k; ++i) scratch_append_step(steps, "step " + std::to_string(i));
    CHECK(scratch_read_steps(steps).size() == static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) CHECK(scratch_pop_step(steps) == "step " + std::to_string(i));
    CHECK(testutil::slurp(steps).empty());
  }
}

TEST_CASE("foreign test primitive inside the engine") {
  PrimitiveRegistry reg;
  reg.add(make_foreign_primitive(echo_test("Said"), {}));
  auto net = parse(
      "net main:\n  state A init\n  state B final\n"
      "  arrow A -> B: Said(\"no\")\n  arrow A -> B: Said(\"yes\")\n");
  auto r = run(net, reg, {});
  REQUIRE(r.count == 1);
  CHECK(r.solutions[0].path == std::vector<PathStep>{{"main", 1}});

  auto bad = parse("net main:\n  state A init\n  state B final\n  arrow A -> B: Said(\"maybe\")\n");
  auto e = run(bad, reg, {});
  CHECK(e.termination == Termination::Aborted);
  CHECK(e.error.find("protocol error") != std::string::npos);
}

TEST_CASE("foreign result slot feeds later items") {
  ForeignPrimitiveSpec s;
  s.name = "Greet";
  s.params = {{"who", ParamMode::In, ParamKind::Text}, {"msg", ParamMode::Out, ParamKind::Text}};
  s.forward_cmd = worker({"echo", "hello", "{1}"});
  s.capture = CaptureMode::FirstLine;
  s.result_slot = 0;
  PrimitiveRegistry reg;
  reg.add(make_foreign_primitive(s, {}));
  add_natives(reg, {"Eq"}, {});
  auto net = parse(
      "net main:\n  state A init\n  state B final\n"
      "  arrow A -> B: Greet(\"you all\", &m); Eq($m, \"hello you all\")\n");
  Session session(net, reg, {});
  REQUIRE(session.next_solution());
  CHECK(session.vars().at("m") == "hello you all");
}

TEST_CASE("nonzero exit aborts the run") {
  ForeignPrimitiveSpec s;
  s.name = "Crash";
  s.forward_cmd = worker({"exit-5"});
  PrimitiveRegistry reg;
  reg.add(make_foreign_primitive(s, {}));
  auto net = parse("net main:\n  state A init\n  state B final\n  arrow A -> B: Crash()\n");
  auto r = run(net, reg, {});
  CHECK(r.termination == Termination::Aborted);
  CHECK(r.error.find("exited with code 5") != std::string::npos);
}

TEST_CASE("backward commands run on backtracking, and after failure when asked") {
  testutil::TempDir dir;
  ForeignPrimitiveSpec step;
  step.name = "Step";
  step.params = {{"tag", ParamMode::In, ParamKind::Text}};
  step.forward_cmd = {"sh", "-c", "echo +$0 >> log", "{1}"};
  step.backward_cmd = Argv{"sh", "-c", "echo -$0 >> log", "{1}"};

  ForeignPrimitiveSpec probe;
  probe.name = "Probe";
  probe.kind = PrimitiveKind::Combined;
  probe.forward_cmd = {"sh", "-c", "echo +probe >> log; echo 0"};
  probe.backward_cmd = Argv{"sh", "-c", "echo -probe >> log"};
  probe.capture = CaptureMode::FirstLine;
  probe.test_map = TestMap{};
  probe.undo_on_failure = true;

  PrimitiveRegistry reg;
  reg.add(make_foreign_primitive(step, dir.path()));
  reg.add(make_foreign_primitive(probe, dir.path()));
  auto net = parse("net main:\n  state A init\n  state B final\n  arrow A -> B: Step(\"a\"); Step(\"b\"); Probe()\n");
  auto r = run(net, reg, {});
  CHECK(r.count == 0);
  CHECK(r.termination == Termination::Exhausted);
  CHECK(testutil::lines(testutil::slurp(dir / "log")) == Argv{"+a", "+b", "+probe", "-probe", "-b", "-a"});
}
