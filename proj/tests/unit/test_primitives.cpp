#include "doctest.h"

#include "cnp/engine.hpp"
#include "cnp/error.hpp"
#include "cnp/natives.hpp"
#include "cnp/parser.hpp"

using namespace cnp;

namespace {

ParamSpec in(std::string n, ParamKind k = ParamKind::Text) { return {std::move(n), ParamMode::In, k}; }
ParamSpec out(std::string n) { return {std::move(n), ParamMode::Out, ParamKind::Text}; }

PrimitiveDef def_of(std::string name, std::vector<ParamSpec> params, PrimitiveKind kind = PrimitiveKind::Action,
                    Handler h = [](Direction, BoundArgs&, ExecutionContext&) { return Outcome::success(); }) {
  return {std::move(name), std::move(params), kind, std::move(h)};
}

PrimitiveCall call_of(std::string name, std::vector<Arg> args) { return {std::move(name), std::move(args)}; }

}  // namespace

TEST_CASE("registry: register, resolve, reject duplicates") {
  PrimitiveRegistry reg;
  reg.add(def_of("Walk", {in("from"), in("to")}));
  REQUIRE(reg.find("Walk"));
  CHECK(reg.find("Walk")->arity() == 2);
  CHECK(reg.contains("Walk"));
  CHECK_FALSE(reg.contains("Run"));
  CHECK_THROWS_AS(reg.add(def_of("Walk", {})), DuplicateName);
  CHECK(reg.names() == std::vector<std::string>{"Walk"});
}

TEST_CASE("registry: unknown primitive at load names the call site") {
  auto net = parse("net main:\n  state A init\n  state B final\n  arrow A -> B: Run()\n");
  PrimitiveRegistry reg;
  try {
    check_loadable(net, reg);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()) == "unknown primitive 'Run' in net main, arrow 0 (A -> B) at line 4, item 1");
  }
  CHECK_THROWS_AS(Session(net, reg, {}), LoadError);
}

TEST_CASE("bind_args: variables, literals and slots") {
  auto calc = def_of("CalcBmiPy", {in("kg", ParamKind::Int), in("cm", ParamKind::Int), out("res")});
  VarStore store{{"kg", "70"}, {"cm", "175"}};
  auto b = bind_args(calc, call_of("CalcBmiPy", {VarIn{"kg"}, VarIn{"cm"}, VarOut{"res"}}), store);
  CHECK(b.in == std::vector<std::string>{"70", "175"});
  CHECK(b.integer(0) == 70);
  CHECK(b.integer(1) == 175);
  CHECK(b.out_slots == std::vector<std::string>{"res"});
  REQUIRE(b.out_values.size() == 1);
  CHECK_FALSE(b.out_values[0]);

  auto walk = def_of("Walk", {in("from"), in("to")});
  auto w = bind_args(walk, call_of("Walk", {LiteralText{"Door"}, LiteralText{"Window"}}), {});
  CHECK(w.in == std::vector<std::string>{"Door", "Window"});
  CHECK_THROWS_AS(w.integer(0), TypeMismatch);

  auto ints = def_of("N", {in("n", ParamKind::Int)});
  CHECK(bind_args(ints, call_of("N", {LiteralInt{-3}}), {}).integer(0) == -3);
  CHECK(bind_args(ints, call_of("N", {LiteralText{"12"}}), {}).integer(0) == 12);
}

TEST_CASE("bind_args: errors") {
  auto bmiw = def_of("BmiW", {in("kg", ParamKind::Int), in("cm", ParamKind::Int)});
  CHECK_THROWS_AS(bind_args(bmiw, call_of("BmiW", {VarIn{"kg"}, VarIn{"cm"}}), {{"kg", "abc"}, {"cm", "1"}}),
                  TypeMismatch);
  CHECK_THROWS_AS(bind_args(bmiw, call_of("BmiW", {LiteralText{"7x"}, LiteralInt{1}}), {}), TypeMismatch);
  CHECK_THROWS_AS(bind_args(bmiw, call_of("BmiW", {VarIn{"kg"}, LiteralInt{1}}), {}), UnboundVariable);
  CHECK_THROWS_AS(bind_args(bmiw, call_of("BmiW", {LiteralInt{1}}), {}), LoadError);

  auto set = def_of("Set", {out("var"), in("value")});
  CHECK_THROWS_AS(bind_args(set, call_of("Set", {LiteralText{"x"}, LiteralText{"v"}}), {}), ModeMismatch);
  CHECK_THROWS_AS(bind_args(set, call_of("Set", {VarOut{"x"}, VarOut{"y"}}), {}), ModeMismatch);
}

TEST_CASE("invoke: out slots are committed only on success") {
  int calls = 0;
  bool succeed = true;
  auto def = def_of("Get", {out("x")}, PrimitiveKind::Combined,
                    [&](Direction, BoundArgs& a, ExecutionContext& ctx) {
                      ++calls;
                      a.set_output(0, "new");
                      ctx.write_var("side", "effect");
                      return succeed ? Outcome::success() : Outcome::failure();
                    });
  LocalContext ctx(VarStore{{"x", "old"}});
  auto bound = bind_args(def, call_of("Get", {VarOut{"x"}}), ctx.vars());

  succeed = false;
  CHECK(invoke(def, Direction::Forward, bound, ctx).failed());
  CHECK(ctx.vars() == VarStore{{"x", "old"}});
  CHECK(ctx.journal_size() == 0);

  succeed = true;
  CHECK(invoke(def, Direction::Forward, bound, ctx).ok());
  CHECK(ctx.vars() == VarStore{{"x", "new"}, {"side", "effect"}});
  CHECK(ctx.journal_size() == 2);
  ctx.undo_last_write();
  ctx.undo_last_write();
  CHECK(ctx.vars() == VarStore{{"x", "old"}});
  CHECK(calls == 2);
}

TEST_CASE("invoke: test primitives are not called backward") {
  int calls = 0;
  auto def = def_of("T", {}, PrimitiveKind::Test, [&](Direction, BoundArgs&, ExecutionContext&) {
    ++calls;
    return Outcome::failure();
  });
  LocalContext ctx;
  BoundArgs none;
  CHECK(invoke(def, Direction::Backward, none, ctx).ok());
  CHECK(calls == 0);
  CHECK(invoke(def, Direction::Forward, none, ctx).failed());
  CHECK(calls == 1);
}

TEST_CASE("invoke: raise_failure, exceptions and backward failure") {
  LocalContext ctx;
  BoundArgs none;
  auto raising = def_of("R", {}, PrimitiveKind::Combined, [](Direction, BoundArgs&, ExecutionContext& c) {
    c.raise_failure();
    return Outcome::success();
  });
  CHECK(invoke(raising, Direction::Forward, none, ctx).failed());
  CHECK_FALSE(ctx.failure_raised());

  auto throwing = def_of("X", {}, PrimitiveKind::Action, [](Direction, BoundArgs&, ExecutionContext&) -> Outcome {
    throw std::runtime_error("boom");
  });
  auto o = invoke(throwing, Direction::Forward, none, ctx);
  CHECK(o.is_error());
  CHECK(o.message() == "boom");

  auto failing_back = def_of("F", {}, PrimitiveKind::Action, [](Direction, BoundArgs&, ExecutionContext&) {
    return Outcome::failure();
  });
  CHECK(invoke(failing_back, Direction::Backward, none, ctx).is_error());

  auto writer = def_of("W", {}, PrimitiveKind::Action, [](Direction, BoundArgs&, ExecutionContext& c) {
    c.write_var("v", "1");
    return Outcome::success();
  });
  ctx.set_direction(Direction::Backward);
  auto wb = invoke(writer, Direction::Backward, none, ctx);
  CHECK(wb.is_error());
  CHECK(wb.message().find("'v'") != std::string::npos);
}

TEST_CASE("invoke: Walk forward then backward restores the monkey") {
  PrimitiveRegistry reg;
  auto pack = std::make_shared<MonkeyBanana>(Console{});
  MonkeyBanana::register_all(pack, reg);
  pack->set_state(MbState{"Door", "Window", 0, {""}});
  const MbState before = pack->state();

  LocalContext ctx;
  auto walk = bind_args(*reg.find("Walk"), call_of("Walk", {LiteralText{"Door"}, LiteralText{"Window"}}), {});
  CHECK(invoke(*reg.find("Walk"), Direction::Forward, walk, ctx).ok());
  CHECK(pack->state().monkey_pos == "Window");
  CHECK(invoke(*reg.find("Walk"), Direction::Backward, walk, ctx).ok());
  CHECK(pack->state().monkey_pos == "Door");
  CHECK(pack->state().step_ptr == before.step_ptr);

  BoundArgs none;
  CHECK(invoke(*reg.find("Climb"), Direction::Forward, none, ctx).failed());
}

TEST_CASE("local context: reads, writes and options") {
  LocalContext ctx(VarStore{{"kg", "60"}});
  CHECK_THROWS_AS(ctx.read_var("nope"), UnboundVariable);
  ctx.write_var("kg", "70");
  CHECK(ctx.read_var("kg") == "70");
  ctx.write_var("kg", "80");
  ctx.undo_last_write();
  ctx.undo_last_write();
  CHECK(ctx.read_var("kg") == "60");
  ctx.set_options({3, 9, Direction::Forward});
  ctx.set_direction(Direction::Backward);
  CHECK(ctx.current_options().curr_sol == 3);
  CHECK(ctx.current_options().direction == Direction::Backward);
  CHECK_THROWS_AS(ctx.write_var("kg", "1"), WriteDuringBackward);
}
