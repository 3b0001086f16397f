#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cnp/engine.hpp"
#include "cnp/error.hpp"
#include "cnp/foreign.hpp"
#include "cnp/manifest.hpp"
#include "cnp/natives.hpp"
#include "cnp/parser.hpp"

namespace py = pybind11;

namespace {

py::dict diagnostic_dict(const cnp::Diagnostic& d) {
  py::dict out;
  out["rule"] = std::string(cnp::rule_id(d.rule));
  out["subnet"] = d.subnet;
  out["arrow"] = d.arrow ? py::cast(*d.arrow) : py::none();
  out["line"] = d.line;
  out["message"] = d.message;
  return out;
}

py::list path_list(const std::vector<cnp::PathStep>& path) {
  py::list out;
  for (const auto& step : path) out.append(py::make_tuple(step.subnet, step.arrow));
  return out;
}

cnp::ParamSpec parse_param(const std::string& spec) {
  // "name", "&name", "name:int"
  cnp::ParamSpec p;
  std::string s = spec;
  if (!s.empty() && s.front() == '&') {
    p.mode = cnp::ParamMode::Out;
    s.erase(0, 1);
  }
  if (auto colon = s.find(':'); colon != std::string::npos) {
    std::string kind = s.substr(colon + 1);
    if (kind == "int") p.kind = cnp::ParamKind::Int;
    else if (kind != "text") throw py::value_error("unknown parameter kind '" + kind + "'");
    s.resize(colon);
  }
  p.name = s;
  return p;
}

cnp::PrimitiveKind parse_kind(const std::string& kind) {
  if (kind == "action") return cnp::PrimitiveKind::Action;
  if (kind == "test") return cnp::PrimitiveKind::Test;
  if (kind == "combined") return cnp::PrimitiveKind::Combined;
  throw py::value_error("kind must be action, test or combined");
}

// What a Python handler sees during one invocation. Invalid after it returns.
class Call {
 public:
  Call(cnp::Direction d, cnp::BoundArgs& args, cnp::ExecutionContext& ctx) : direction_(d), args_(&args), ctx_(&ctx) {}

  std::string direction() const { return direction_ == cnp::Direction::Forward ? "forward" : "backward"; }
  std::vector<std::string> inputs() const { return live().in; }
  void set_output(std::size_t slot, std::string value) { live().set_output(slot, std::move(value)); }
  std::optional<std::string> find_var(const std::string& name) const { return ctx().find_var(name); }
  std::string read_var(const std::string& name) const { return ctx().read_var(name); }
  void write_var(const std::string& name, std::string value) { ctx().write_var(name, std::move(value)); }
  std::size_t curr_sol() const { return ctx().current_options().curr_sol; }
  void release() { args_ = nullptr, ctx_ = nullptr; }

 private:
  cnp::BoundArgs& live() const {
    if (!args_) throw cnp::Error("call object used after its primitive returned");
    return *args_;
  }
  cnp::ExecutionContext& ctx() const {
    if (!ctx_) throw cnp::Error("call object used after its primitive returned");
    return *ctx_;
  }

  cnp::Direction direction_;
  cnp::BoundArgs* args_;
  cnp::ExecutionContext* ctx_;
};

// Handlers return True/None for success, False for failure; an exception is
// an error outcome.
cnp::Handler python_handler(py::function fn) {
  auto shared = std::make_shared<py::function>(std::move(fn));
  return [shared](cnp::Direction d, cnp::BoundArgs& args, cnp::ExecutionContext& ctx) -> cnp::Outcome {
    py::gil_scoped_acquire gil;
    auto call = std::make_shared<Call>(d, args, ctx);
    try {
      py::object result = (*shared)(call);
      call->release();
      if (result.is_none() || (py::isinstance<py::bool_>(result) && result.cast<bool>()))
        return cnp::Outcome::success();
      if (py::isinstance<py::bool_>(result)) return cnp::Outcome::failure();
      return cnp::Outcome::error("python primitive returned " + std::string(py::str(py::type::of(result))));
    } catch (py::error_already_set& e) {
      call->release();
      return cnp::Outcome::error(e.what());
    }
  };
}

struct Registry {
  cnp::PrimitiveRegistry inner;
  std::shared_ptr<std::ostringstream> console = std::make_shared<std::ostringstream>();
};

py::dict run_dict(const cnp::RunResult& r, const cnp::VarStore& vars, const std::string& trace) {
  py::dict out;
  py::list sols;
  for (const auto& s : r.solutions) sols.append(path_list(s.path));
  out["solutions"] = sols;
  out["count"] = r.count;
  out["termination"] = std::string(cnp::to_string(r.termination));
  out["error"] = r.error;
  out["vars"] = vars;
  out["trace"] = trace;
  return out;
}

class PySession {
 public:
  PySession(std::shared_ptr<cnp::ControlNetwork> net, std::shared_ptr<Registry> reg, cnp::RunConfig config)
      : net_(std::move(net)), reg_(std::move(reg)), trace_(std::make_shared<std::ostringstream>()) {
    config.trace = trace_.get();
    session_ = std::make_unique<cnp::Session>(*net_, reg_->inner, std::move(config));
  }

  std::optional<py::list> next() {
    auto s = session_->next_solution();
    if (!s) return std::nullopt;
    return path_list(s->path);
  }

  bool finished() const { return session_->finished(); }
  std::string termination() const { return std::string(cnp::to_string(session_->termination())); }
  std::string error() const { return session_->error(); }
  std::size_t count() const { return session_->solution_count(); }
  cnp::VarStore vars() const { return session_->vars(); }
  std::size_t trail_length() const { return session_->trail().size(); }
  std::string trace() const { return trace_->str(); }

 private:
  std::shared_ptr<cnp::ControlNetwork> net_;
  std::shared_ptr<Registry> reg_;
  std::shared_ptr<std::ostringstream> trace_;
  std::unique_ptr<cnp::Session> session_;
};

cnp::RunConfig make_config(std::optional<std::size_t> max_solutions, std::optional<std::size_t> max_depth,
                           std::map<std::string, std::string> vars) {
  cnp::RunConfig c;
  c.max_solutions = max_solutions;
  c.max_depth = max_depth;
  c.initial_vars.insert(vars.begin(), vars.end());
  return c;
}

}  // namespace

PYBIND11_MODULE(_cnp, m) {
  m.doc() = "Control Network Programming runtime";

  auto base = py::register_exception<cnp::Error>(m, "CnpError");
  py::register_exception<cnp::ParseError>(m, "ParseError", base);
  py::register_exception<cnp::ValidationError>(m, "ValidationError", base);
  py::register_exception<cnp::LoadError>(m, "LoadError", base);
  py::register_exception<cnp::ManifestError>(m, "ManifestError", base);
  py::register_exception<cnp::NonPositiveInput>(m, "NonPositiveInput", base);
  py::register_exception<cnp::PlaceholderOutOfRange>(m, "PlaceholderOutOfRange", base);
  py::register_exception<cnp::SpawnError>(m, "SpawnError", base);

  py::class_<cnp::ControlNetwork, std::shared_ptr<cnp::ControlNetwork>>(m, "Network")
      .def_property_readonly("subnets",
                             [](const cnp::ControlNetwork& n) {
                               std::vector<std::string> names;
                               for (const auto& s : n.subnets) names.push_back(s.name);
                               return names;
                             })
      .def("arrow_count", [](const cnp::ControlNetwork& n, const std::string& subnet) {
        const auto* s = n.find_subnet(subnet);
        if (!s) throw py::key_error(subnet);
        return s->arrows.size();
      })
      .def("serialize", [](const cnp::ControlNetwork& n) { return cnp::serialize(n); })
      .def("__eq__", [](const cnp::ControlNetwork& a, const cnp::ControlNetwork& b) { return a == b; });

  m.def("parse", [](const std::string& text) { return std::make_shared<cnp::ControlNetwork>(cnp::parse(text)); },
        py::arg("text"));
  m.def(
      "validate",
      [](const std::string& text) {
        py::list out;
        try {
          cnp::parse(text);
        } catch (const cnp::ValidationError& e) {
          for (const auto& d : e.diagnostics()) out.append(diagnostic_dict(d));
        }
        return out;
      },
      py::arg("text"), "Diagnostics for a syntactically valid program. Raises ParseError otherwise.");

  py::class_<Call, std::shared_ptr<Call>>(m, "Call")
      .def_property_readonly("direction", &Call::direction)
      .def_property_readonly("inputs", &Call::inputs)
      .def_property_readonly("curr_sol", &Call::curr_sol)
      .def("set_output", &Call::set_output)
      .def("find_var", &Call::find_var)
      .def("read_var", &Call::read_var)
      .def("write_var", &Call::write_var);

  py::class_<Registry, std::shared_ptr<Registry>>(m, "Registry")
      .def(py::init<>())
      .def(
          "add",
          [](Registry& r, const std::string& name, const std::vector<std::string>& params, const std::string& kind,
             py::function fn) {
            cnp::PrimitiveDef def;
            def.name = name;
            for (const auto& p : params) def.params.push_back(parse_param(p));
            def.kind = parse_kind(kind);
            def.handler = python_handler(std::move(fn));
            r.inner.add(std::move(def));
          },
          py::arg("name"), py::arg("params"), py::arg("kind"), py::arg("handler"))
      .def(
          "add_natives",
          [](Registry& r, const std::vector<std::string>& names, const std::string& scratch_dir) {
            cnp::add_natives(r.inner, names, {{nullptr, r.console.get()}, scratch_dir});
          },
          py::arg("names"), py::arg("scratch_dir") = ".")
      .def(
          "load_manifest",
          [](Registry& r, const std::filesystem::path& path, std::optional<std::filesystem::path> working_dir) {
            auto dir = working_dir ? *working_dir : std::filesystem::absolute(path).parent_path();
            auto reg = cnp::build_registry(cnp::load_manifest(path), {{nullptr, r.console.get()}, dir}, dir);
            for (const auto& name : reg.names()) r.inner.add(*reg.find(name));
          },
          py::arg("path"), py::arg("working_dir") = py::none())
      .def("names", [](const Registry& r) { return r.inner.names(); })
      .def(
          "take_output",
          [](Registry& r) {
            std::string s = r.console->str();
            r.console->str("");
            return s;
          },
          "Console text printed by natives since the last call.");

  py::class_<PySession>(m, "Session")
      .def(py::init([](std::shared_ptr<cnp::ControlNetwork> net, std::shared_ptr<Registry> reg,
                       std::optional<std::size_t> max_solutions, std::optional<std::size_t> max_depth,
                       std::map<std::string, std::string> vars) {
             return std::make_unique<PySession>(std::move(net), std::move(reg),
                                                make_config(max_solutions, max_depth, std::move(vars)));
           }),
           py::arg("network"), py::arg("registry"), py::arg("max_solutions") = py::none(),
           py::arg("max_depth") = py::none(), py::arg("vars") = std::map<std::string, std::string>{})
      .def("next_solution", &PySession::next)
      .def_property_readonly("finished", &PySession::finished)
      .def_property_readonly("termination", &PySession::termination)
      .def_property_readonly("error", &PySession::error)
      .def_property_readonly("count", &PySession::count)
      .def_property_readonly("vars", &PySession::vars)
      .def_property_readonly("trail_length", &PySession::trail_length)
      .def_property_readonly("trace", &PySession::trace);

  m.def(
      "run",
      [](const cnp::ControlNetwork& net, const Registry& reg, std::optional<std::size_t> max_solutions,
         std::optional<std::size_t> max_depth, std::map<std::string, std::string> vars) {
        std::ostringstream trace;
        auto config = make_config(max_solutions, max_depth, std::move(vars));
        config.trace = &trace;
        cnp::Session session(net, reg.inner, config);
        cnp::RunResult r;
        while (auto s = session.next_solution()) r.solutions.push_back(*s);
        r.count = session.solution_count();
        r.termination = session.termination();
        r.error = session.error();
        return run_dict(r, session.vars(), trace.str());
      },
      py::arg("network"), py::arg("registry"), py::arg("max_solutions") = py::none(),
      py::arg("max_depth") = py::none(), py::arg("vars") = std::map<std::string, std::string>{});

  m.def(
      "classify_bmi",
      [](std::int64_t kg, std::int64_t cm) {
        auto r = cnp::classify_bmi(kg, cm);
        return py::make_tuple(r.bmi, std::string(cnp::to_string(r.category)));
      },
      py::arg("kg"), py::arg("cm"));
  m.def("format_bmi", &cnp::format_bmi);

  m.def("split_command", &cnp::split_command);
  m.def("render_command", &cnp::render_command, py::arg("template"), py::arg("values"));
  m.def(
      "run_sync",
      [](const std::vector<std::string>& argv, const std::filesystem::path& working_dir, const std::string& capture) {
        cnp::ProcessOptions opt{working_dir, cnp::CaptureMode::FirstLine};
        if (capture == "none") opt.capture = cnp::CaptureMode::None;
        else if (capture == "all_lines") opt.capture = cnp::CaptureMode::AllLines;
        else if (capture != "first_line") throw py::value_error("capture must be none, first_line or all_lines");
        cnp::CapturedOutput out;
        {
          py::gil_scoped_release release;
          out = cnp::run_sync(argv, opt);
        }
        return py::make_tuple(out.lines, out.exit_code);
      },
      py::arg("argv"), py::arg("working_dir") = std::filesystem::path{}, py::arg("capture") = "first_line");

  m.def("scratch_write_positions", &cnp::scratch_write_positions);
  m.def("scratch_read_positions", &cnp::scratch_read_positions);
  m.def("scratch_append_step", &cnp::scratch_append_step);
  m.def("scratch_pop_step", &cnp::scratch_pop_step);
  m.def("scratch_read_steps", &cnp::scratch_read_steps);
}
