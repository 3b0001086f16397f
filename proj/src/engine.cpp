#include "cnp/engine.hpp"

#include <cassert>
#include <map>

#include "json.hpp"

#include "cnp/error.hpp"
#include "cnp/parser.hpp"

namespace cnp {

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Exhausted: return "exhausted";
    case Termination::SolutionLimit: return "solution-limit";
    case Termination::DepthLimit: return "depth-limit";
    case Termination::Aborted: return "aborted";
  }
  return "exhausted";
}

namespace {

using ordered_json = nlohmann::ordered_json;

std::string call_site(const Subnet& sn, std::size_t arrow, std::size_t item) {
  const Arrow& a = sn.arrows[arrow];
  std::string out = "net " + sn.name + ", arrow " + std::to_string(arrow) + " (" + a.from + " -> " + a.to + ")";
  if (a.line > 0) out += " at line " + std::to_string(a.line);
  out += ", item " + std::to_string(item + 1);
  return out;
}

struct Item {
  const PrimitiveDef* def = nullptr;        // set for primitive calls
  const PrimitiveCall* call = nullptr;
  std::size_t callee = 0;                   // subnet index for subnet calls
};

struct CompiledSubnet {
  const Subnet* source = nullptr;
  std::size_t initial = 0;
  std::vector<bool> final;
  std::vector<std::optional<int>> visit_limit;
  std::vector<std::vector<std::size_t>> outgoing;  // arrow indices per state, in declaration order
  std::vector<std::size_t> from, to;
  std::vector<std::vector<Item>> items;
};

}  // namespace

void check_loadable(const ControlNetwork& net, const PrimitiveRegistry& registry) {
  for (const auto& sn : net.subnets) {
    for (std::size_t a = 0; a < sn.arrows.size(); ++a) {
      const auto& items = sn.arrows[a].items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto* call = std::get_if<PrimitiveCall>(&items[i]);
        if (!call) continue;
        const PrimitiveDef* def = registry.find(call->name);
        if (!def) throw LoadError("unknown primitive '" + call->name + "' in " + call_site(sn, a, i));
        try {
          check_call(*def, *call);
        } catch (const Error& e) {
          throw LoadError(std::string(e.what()) + " in " + call_site(sn, a, i));
        }
      }
    }
  }
}

std::string path_to_json(const std::vector<PathStep>& path) {
  ordered_json arr = ordered_json::array();
  for (const auto& step : path) arr.push_back(ordered_json{{"net", step.subnet}, {"arrow", step.arrow}});
  return arr.dump();
}

class Session::Impl {
 public:
  Impl(const ControlNetwork& net, const PrimitiveRegistry& registry, RunConfig config)
      : net_(net), config_(std::move(config)), vars_(config_.initial_vars), ctx_(*this) {
    if (auto diags = validate(net); !diags.empty()) throw ValidationError(std::move(diags));
    check_loadable(net, registry);
    compile(registry);

    main_ = index_of(net.main);
    const auto& m = subnets_[main_];
    visits_[main_][m.initial] = 1;
    state_ = m.initial;
    alternative_ = 0;
    mode_ = Mode::Choose;
  }

  std::optional<SolutionReport> next_solution() {
    try {
      while (mode_ != Mode::Done) {
        switch (mode_) {
          case Mode::Choose:
            if (auto sol = choose()) return sol;
            break;
          case Mode::Exec: exec(); break;
          case Mode::Backtrack: backtrack(); break;
          case Mode::Done: break;
        }
      }
    } catch (const SearchInterrupted&) {
      finish(Termination::DepthLimit);
    }
    return std::nullopt;
  }

  bool finished() const { return mode_ == Mode::Done; }
  Termination termination() const { return termination_; }
  const std::string& error() const { return error_; }
  std::size_t solution_count() const { return solutions_; }
  const VarStore& vars() const { return vars_; }
  const std::vector<TrailEntry>& trail() const { return trail_; }

 private:
  enum class Mode { Choose, Exec, Backtrack, Done };

  class Context : public ExecutionContext {
   public:
    explicit Context(Impl& owner) : owner_(owner) {}

    Direction direction() const override { return direction_; }
    std::string read_var(std::string_view name) const override {
      auto it = owner_.vars_.find(name);
      if (it == owner_.vars_.end()) throw UnboundVariable(std::string(name));
      return it->second;
    }
    std::optional<std::string> find_var(std::string_view name) const override {
      auto it = owner_.vars_.find(name);
      if (it == owner_.vars_.end()) return std::nullopt;
      return it->second;
    }
    void write_var(std::string_view name, std::string value) override {
      if (direction_ != Direction::Forward) throw WriteDuringBackward(std::string(name));
      owner_.push(trail::VarWrite{std::string(name), find_var(name)});
      owner_.vars_.insert_or_assign(std::string(name), std::move(value));
    }
    OptionsView current_options() const override {
      return OptionsView{owner_.solutions_, owner_.trail_.size(), direction_};
    }
    std::size_t checkpoint() const override { return owner_.trail_.size(); }
    void rollback(std::size_t mark) override {
      while (owner_.trail_.size() > mark) {
        auto* w = std::get_if<trail::VarWrite>(&owner_.trail_.back());
        assert(w && "only variable writes can follow a checkpoint");
        if (!w) break;
        owner_.restore(*w);
        owner_.trail_.pop_back();
      }
    }

    void set_direction(Direction d) { direction_ = d; }

   private:
    Impl& owner_;
    Direction direction_ = Direction::Forward;
  };

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < net_.subnets.size(); ++i)
      if (net_.subnets[i].name == name) return i;
    throw LoadError("unknown subnet '" + std::string(name) + "'");
  }

  void compile(const PrimitiveRegistry& registry) {
    subnets_.resize(net_.subnets.size());
    visits_.resize(net_.subnets.size());
    active_.resize(net_.subnets.size());
    for (std::size_t s = 0; s < net_.subnets.size(); ++s) {
      const Subnet& sn = net_.subnets[s];
      CompiledSubnet& c = subnets_[s];
      c.source = &sn;
      std::map<std::string, std::size_t, std::less<>> idx;
      for (std::size_t i = 0; i < sn.states.size(); ++i) {
        idx.emplace(sn.states[i].name, i);
        c.final.push_back(sn.is_final(sn.states[i].name));
        c.visit_limit.push_back(sn.states[i].visit_limit);
      }
      c.initial = idx.at(sn.initial);
      c.outgoing.resize(sn.states.size());
      for (std::size_t a = 0; a < sn.arrows.size(); ++a) {
        const Arrow& arrow = sn.arrows[a];
        c.from.push_back(idx.at(arrow.from));
        c.to.push_back(idx.at(arrow.to));
        c.outgoing[c.from.back()].push_back(a);
        auto& items = c.items.emplace_back();
        for (const auto& item : arrow.items) {
          Item it;
          if (const auto* call = std::get_if<PrimitiveCall>(&item)) {
            it.def = registry.find(call->name);
            it.call = call;
          } else {
            it.callee = index_of(std::get<SubnetCall>(item).name);
          }
          items.push_back(it);
        }
      }
      visits_[s].assign(sn.states.size(), 0);
      active_[s].assign(sn.arrows.size(), 0);
    }
  }

  std::size_t current_subnet() const { return frames_.empty() ? main_ : frames_.back().callee; }

  void push(TrailEntry entry) {
    if (config_.max_depth && trail_.size() >= *config_.max_depth) throw SearchInterrupted{};
    trail_.push_back(std::move(entry));
  }

  void restore(const trail::VarWrite& w) {
    if (w.previous)
      vars_.insert_or_assign(w.name, *w.previous);
    else
      vars_.erase(w.name);
  }

  void emit(const ordered_json& event) {
    if (config_.trace) *config_.trace << event.dump() << '\n';
  }

  void emit_item(std::string_view ev, std::size_t subnet, std::size_t arrow, std::size_t item) {
    if (!config_.trace) return;
    emit(ordered_json{{"ev", ev}, {"net", net_.subnets[subnet].name}, {"arrow", arrow}, {"item", item}});
  }

  void finish(Termination t, std::string error = {}) {
    mode_ = Mode::Done;
    termination_ = t;
    error_ = std::move(error);
  }

  std::optional<SolutionReport> choose() {
    const std::size_t s = current_subnet();
    const CompiledSubnet& c = subnets_[s];
    const std::size_t offset = c.final[state_] ? 1 : 0;
    const auto& outgoing = c.outgoing[state_];

    if (alternative_ >= offset + outgoing.size()) {
      mode_ = Mode::Backtrack;
      return std::nullopt;
    }

    if (offset && alternative_ == 0) {
      alternative_ = 1;
      if (frames_.empty()) return report_solution();
      const trail::CallFrame frame = frames_.back();
      push(trail::SubnetReturned{frame, state_});
      frames_.pop_back();
      if (config_.trace) emit(ordered_json{{"ev", "ret"}, {"subnet", net_.subnets[frame.callee].name}});
      arrow_ = frame.caller_arrow;
      item_ = frame.caller_item + 1;
      mode_ = Mode::Exec;
      return std::nullopt;
    }

    const std::size_t arrow = outgoing[alternative_ - offset];
    const auto& range = c.source->arrows[arrow].range;
    const std::size_t target = c.to[arrow];
    const auto& limit = c.visit_limit[target];
    if ((range && active_[s][arrow] >= *range) || (limit && visits_[s][target] >= *limit)) {
      ++alternative_;
      return std::nullopt;
    }
    push(trail::ArrowEntered{s, arrow, alternative_});
    ++active_[s][arrow];
    ++visits_[s][target];
    arrow_ = arrow;
    item_ = 0;
    mode_ = Mode::Exec;
    return std::nullopt;
  }

  std::optional<SolutionReport> report_solution() {
    SolutionReport report;
    report.index = solutions_;
    for (const auto& entry : trail_)
      if (const auto* a = std::get_if<trail::ArrowEntered>(&entry))
        report.path.push_back(PathStep{net_.subnets[a->subnet].name, a->arrow});
    ++solutions_;
    if (config_.trace) {
      ordered_json path = ordered_json::array();
      for (const auto& step : report.path) path.push_back(ordered_json{{"net", step.subnet}, {"arrow", step.arrow}});
      emit(ordered_json{{"ev", "sol"}, {"index", report.index}, {"path", path}});
    }
    if (config_.max_solutions && solutions_ >= *config_.max_solutions) finish(Termination::SolutionLimit);
    return report;
  }

  void exec() {
    const std::size_t s = current_subnet();
    const CompiledSubnet& c = subnets_[s];
    const auto& items = c.items[arrow_];
    if (item_ == items.size()) {
      state_ = c.to[arrow_];
      alternative_ = 0;
      mode_ = Mode::Choose;
      return;
    }

    const Item& item = items[item_];
    if (item.def) {
      BoundArgs bound;
      try {
        bound = bind_args(*item.def, *item.call, vars_);
      } catch (const Error& e) {
        finish(Termination::Aborted, std::string(e.what()) + " in " + call_site(*c.source, arrow_, item_));
        return;
      }
      emit_item("fw", s, arrow_, item_);
      ctx_.set_direction(Direction::Forward);
      Outcome outcome = invoke(*item.def, Direction::Forward, bound, ctx_);
      if (outcome.ok()) {
        push(trail::ItemDone{s, arrow_, item_, std::move(bound)});
        ++item_;
      } else if (outcome.failed()) {
        emit_item("fail", s, arrow_, item_);
        mode_ = Mode::Backtrack;
      } else {
        finish(Termination::Aborted, outcome.message() + " in " + call_site(*c.source, arrow_, item_));
      }
      return;
    }

    const std::size_t callee = item.callee;
    const std::size_t init = subnets_[callee].initial;
    const auto& limit = subnets_[callee].visit_limit[init];
    if (limit && visits_[callee][init] >= *limit) {
      emit_item("fail", s, arrow_, item_);
      mode_ = Mode::Backtrack;
      return;
    }
    const trail::CallFrame frame{callee, s, arrow_, item_};
    push(trail::SubnetEntered{frame});
    frames_.push_back(frame);
    ++visits_[callee][init];
    if (config_.trace) emit(ordered_json{{"ev", "call"}, {"subnet", net_.subnets[callee].name}});
    state_ = init;
    alternative_ = 0;
    mode_ = Mode::Choose;
  }

  void backtrack() {
    if (trail_.empty()) {
      finish(Termination::Exhausted);
      return;
    }
    TrailEntry entry = std::move(trail_.back());
    trail_.pop_back();

    if (auto* w = std::get_if<trail::VarWrite>(&entry)) {
      restore(*w);
    } else if (auto* done = std::get_if<trail::ItemDone>(&entry)) {
      const Item& item = subnets_[done->subnet].items[done->arrow][done->item];
      emit_item("bw", done->subnet, done->arrow, done->item);
      ctx_.set_direction(Direction::Backward);
      Outcome outcome = invoke(*item.def, Direction::Backward, done->args, ctx_);
      ctx_.set_direction(Direction::Forward);
      if (!outcome.ok())
        finish(Termination::Aborted,
               outcome.message() + " in " + call_site(*subnets_[done->subnet].source, done->arrow, done->item));
    } else if (auto* a = std::get_if<trail::ArrowEntered>(&entry)) {
      const CompiledSubnet& c = subnets_[a->subnet];
      --active_[a->subnet][a->arrow];
      --visits_[a->subnet][c.to[a->arrow]];
      assert(current_subnet() == a->subnet);
      state_ = c.from[a->arrow];
      alternative_ = a->alternative + 1;
      mode_ = Mode::Choose;
    } else if (auto* entered = std::get_if<trail::SubnetEntered>(&entry)) {
      const auto& f = entered->frame;
      --visits_[f.callee][subnets_[f.callee].initial];
      frames_.pop_back();
      emit_item("fail", f.caller_subnet, f.caller_arrow, f.caller_item);
    } else if (auto* ret = std::get_if<trail::SubnetReturned>(&entry)) {
      const auto& f = ret->frame;
      frames_.push_back(f);
      emit_item("bw", f.caller_subnet, f.caller_arrow, f.caller_item);
      state_ = ret->final_state;
      alternative_ = 1;
      mode_ = Mode::Choose;
    }
  }

  const ControlNetwork& net_;
  RunConfig config_;
  VarStore vars_;
  Context ctx_;

  std::vector<CompiledSubnet> subnets_;
  std::size_t main_ = 0;

  std::vector<TrailEntry> trail_;
  std::vector<trail::CallFrame> frames_;
  std::vector<std::vector<int>> visits_;  // occurrences of each state on the active path
  std::vector<std::vector<int>> active_;  // forward traversals of each arrow on the active path

  Mode mode_ = Mode::Choose;
  std::size_t state_ = 0;
  std::size_t alternative_ = 0;
  std::size_t arrow_ = 0;
  std::size_t item_ = 0;

  std::size_t solutions_ = 0;
  Termination termination_ = Termination::Exhausted;
  std::string error_;
};

Session::Session(const ControlNetwork& net, const PrimitiveRegistry& registry, RunConfig config)
    : impl_(std::make_unique<Impl>(net, registry, std::move(config))) {}

Session::~Session() = default;

std::optional<SolutionReport> Session::next_solution() { return impl_->next_solution(); }
bool Session::finished() const { return impl_->finished(); }
Termination Session::termination() const { return impl_->termination(); }
const std::string& Session::error() const { return impl_->error(); }
std::size_t Session::solution_count() const { return impl_->solution_count(); }
const VarStore& Session::vars() const { return impl_->vars(); }
const std::vector<TrailEntry>& Session::trail() const { return impl_->trail(); }

RunResult run(const ControlNetwork& net, const PrimitiveRegistry& registry, RunConfig config) {
  Session session(net, registry, std::move(config));
  RunResult result;
  while (auto sol = session.next_solution()) result.solutions.push_back(std::move(*sol));
  result.count = result.solutions.size();
  result.termination = session.termination();
  result.error = session.error();
  return result;
}

}  // namespace cnp
