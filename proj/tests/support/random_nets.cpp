#include "random_nets.hpp"

namespace randnet {

namespace {

int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

cnp::PrimitiveCall test_call(std::mt19937& rng) {
  return {"T" + std::to_string(pick(rng, 0, 2)), {cnp::LiteralText{"v" + std::to_string(pick(rng, 0, 3))}}};
}

PassTable make_table(std::mt19937& rng, double pass) {
  PassTable t;
  for (int k = 0; k < 3; ++k)
    for (int x = 0; x < 4; ++x) t[{"T" + std::to_string(k), "v" + std::to_string(x)}] = coin(rng, pass);
  return t;
}

std::vector<cnp::State> states(int n, bool limited) {
  std::vector<cnp::State> out;
  for (int i = 0; i < n; ++i) {
    cnp::State s{"S" + std::to_string(i), std::nullopt};
    if (limited) s.visit_limit = 1;
    out.push_back(s);
  }
  return out;
}

}  // namespace

Acyclic acyclic(std::uint32_t seed) {
  std::mt19937 rng(seed);
  Acyclic out;
  out.table = make_table(rng, 0.7);

  const int n = pick(rng, 2, 6);
  cnp::Subnet main;
  main.name = "main";
  main.states = states(n, false);
  main.initial = "S0";
  for (int i = 1; i < n; ++i)
    if (coin(rng, 0.4)) main.finals.push_back("S" + std::to_string(i));
  if (main.finals.empty()) main.finals.push_back("S" + std::to_string(n - 1));
  if (coin(rng, 0.15)) main.finals.push_back("S0");

  const int m = pick(rng, 1, 10);
  for (int k = 0; k < m; ++k) {
    int from = pick(rng, 0, n - 2);
    int to = pick(rng, from + 1, n - 1);
    cnp::Arrow a;
    a.from = "S" + std::to_string(from);
    a.to = "S" + std::to_string(to);
    for (int i = pick(rng, 0, 2); i > 0; --i) a.items.emplace_back(test_call(rng));
    main.arrows.push_back(std::move(a));
  }
  out.net.subnets.push_back(std::move(main));
  return out;
}

Cyclic cyclic(std::uint32_t seed, bool block_solutions) {
  std::mt19937 rng(seed);
  Cyclic out;
  out.table = make_table(rng, 0.75);
  const bool with_aux = coin(rng, 0.6);

  auto random_item = [&](bool allow_call) -> cnp::CallItem {
    switch (pick(rng, 0, allow_call ? 3 : 2)) {
      case 0:
        return cnp::PrimitiveCall{"Put", {cnp::VarOut{"v" + std::to_string(pick(rng, 0, 2))},
                                          cnp::LiteralText{"w" + std::to_string(pick(rng, 0, 9))}}};
      case 1: return cnp::PrimitiveCall{"Jn", {cnp::LiteralText{"j" + std::to_string(pick(rng, 0, 9))}}};
      case 2: return test_call(rng);
      default: return cnp::SubnetCall{"aux"};
    }
  };

  auto build = [&](const std::string& name, bool is_main) {
    const int n = pick(rng, 2, 6);
    cnp::Subnet sn;
    sn.name = name;
    sn.states = states(n, true);
    sn.initial = "S0";
    for (int i = 1; i < n; ++i)
      if (coin(rng, 0.3)) sn.finals.push_back("S" + std::to_string(i));
    if (sn.finals.empty()) sn.finals.push_back("S" + std::to_string(n - 1));

    const int m = pick(rng, 1, 10);
    for (int k = 0; k < m; ++k) {
      cnp::Arrow a;
      a.from = "S" + std::to_string(pick(rng, 0, n - 1));
      a.to = "S" + std::to_string(pick(rng, 0, n - 1));
      if (coin(rng, 0.1)) a.range = 1;
      for (int i = pick(rng, 0, 3); i > 0; --i) a.items.push_back(random_item(with_aux));
      if (block_solutions && is_main && sn.is_final(a.to)) a.items.emplace_back(cnp::PrimitiveCall{"Fail", {}});
      sn.arrows.push_back(std::move(a));
    }
    return sn;
  };

  out.net.subnets.push_back(build("main", true));
  if (with_aux) out.net.subnets.push_back(build("aux", false));
  return out;
}

void add_table_tests(cnp::PrimitiveRegistry& registry, const PassTable& table) {
  for (int k = 0; k < 3; ++k) {
    std::string name = "T" + std::to_string(k);
    registry.add({name, {{"x", cnp::ParamMode::In, cnp::ParamKind::Text}}, cnp::PrimitiveKind::Test,
                  [name, table](cnp::Direction, cnp::BoundArgs& a, cnp::ExecutionContext&) {
                    return table.at({name, a.text(0)}) ? cnp::Outcome::success() : cnp::Outcome::failure();
                  }});
  }
}

void add_cyclic_prims(cnp::PrimitiveRegistry& registry, const PassTable& table, std::vector<std::string>& journal) {
  add_table_tests(registry, table);
  registry.add({"Put",
                {{"var", cnp::ParamMode::Out, cnp::ParamKind::Text}, {"value", cnp::ParamMode::In, cnp::ParamKind::Text}},
                cnp::PrimitiveKind::Action, [](cnp::Direction d, cnp::BoundArgs& a, cnp::ExecutionContext&) {
                  if (d == cnp::Direction::Forward) a.set_output(0, a.text(0));
                  return cnp::Outcome::success();
                }});
  registry.add({"Jn", {{"tag", cnp::ParamMode::In, cnp::ParamKind::Text}}, cnp::PrimitiveKind::Action,
                [&journal](cnp::Direction d, cnp::BoundArgs& a, cnp::ExecutionContext& ctx) {
                  if (d == cnp::Direction::Forward) {
                    journal.push_back(a.text(0));
                    ctx.write_var("last", a.text(0));
                    return cnp::Outcome::success();
                  }
                  if (journal.empty() || journal.back() != a.text(0))
                    return cnp::Outcome::error("journal out of order at " + a.text(0));
                  journal.pop_back();
                  return cnp::Outcome::success();
                }});
  registry.add({"Fail", {}, cnp::PrimitiveKind::Test,
                [](cnp::Direction, cnp::BoundArgs&, cnp::ExecutionContext&) { return cnp::Outcome::failure(); }});
}

bool expected_outcome(const PassTable& table, const cnp::PrimitiveCall& call) {
  if (call.name == "Fail") return false;
  if (call.name == "Put" || call.name == "Jn") return true;
  return table.at({call.name, std::get<cnp::LiteralText>(call.args.at(0)).value});
}

}  // namespace randnet
