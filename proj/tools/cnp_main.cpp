// cnp: run and check Control Network programs from the command line.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cnp/engine.hpp"
#include "cnp/error.hpp"
#include "cnp/manifest.hpp"
#include "cnp/parser.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitLoad = 2;
constexpr int kExitAborted = 3;
constexpr int kExitUsage = 64;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cnp::IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parse errors and diagnostics go to stderr prefixed with the file name.
std::optional<cnp::ControlNetwork> load_program(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const cnp::IoError& e) {
    std::cerr << "cnp: " << e.what() << '\n';
    return std::nullopt;
  }
  try {
    return cnp::parse(text);
  } catch (const cnp::ParseError& e) {
    std::cerr << path.string() << ':' << e.what() << '\n';
  } catch (const cnp::ValidationError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << path.string() << ':' << cnp::to_string(d) << '\n';
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// fixture-worker: a deterministic child process for protocol tests.

int fixture_worker(int argc, char** argv) {
  if (argc < 1) {
    std::cerr << "fixture-worker: missing mode\n";
    return kExitUsage;
  }
  const std::string mode = argv[0];
  std::vector<std::string> args(argv + 1, argv + argc);

  if (mode == "echo") {
    for (std::size_t i = 0; i < args.size(); ++i) std::cout << (i ? " " : "") << args[i];
    std::cout << '\n';
    return 0;
  }
  if (mode == "first-line") {
    for (const auto& a : args) std::cout << a << '\n';
    return 0;
  }
  if (mode == "test-1" || mode == "test-0") {
    std::cout << mode.back() << '\n';
    return 0;
  }
  if (mode == "argv-count") {
    std::cout << args.size() << '\n';
    return 0;
  }
  if (mode.rfind("exit-", 0) == 0) {
    try {
      std::size_t used = 0;
      int code = std::stoi(mode.substr(5), &used);
      if (used == mode.size() - 5 && code >= 0 && code <= 255) return code;
    } catch (const std::exception&) {
    }
  }
  if (mode == "sleep-then-exit" && !args.empty()) {
    auto stamp = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
    std::optional<fs::path> marker;
    if (args.size() > 1) marker = args[1];
    if (marker) std::ofstream(*marker) << "start " << stamp() << '\n';
    std::this_thread::sleep_for(std::chrono::milliseconds(std::atoll(args[0].c_str())));
    if (marker) std::ofstream(*marker, std::ios::app) << "stop " << stamp() << '\n';
    return 0;
  }
  std::cerr << "fixture-worker: unknown mode '" << mode << "'\n";
  return kExitUsage;
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string program;
  std::string manifest;
  std::vector<std::string> vars;
  std::optional<std::size_t> max_solutions;
  std::optional<std::size_t> max_depth;
  std::string trace;
  bool print_paths = false;
};

int cmd_run(const RunOptions& opt) {
  fs::path program = opt.program;
  fs::path manifest_path = opt.manifest;
  if (fs::is_directory(program)) program /= "program.cn";
  if (manifest_path.empty()) {
    auto beside = program.parent_path() / "manifest.toml";
    if (fs::exists(beside)) manifest_path = beside;
  }

  auto net = load_program(program);
  if (!net) return kExitLoad;

  cnp::RunConfig config;
  for (const auto& kv : opt.vars) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "cnp: --var expects name=value, got '" << kv << "'\n";
      return kExitLoad;
    }
    config.initial_vars[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  config.max_solutions = opt.max_solutions;
  config.max_depth = opt.max_depth;

  fs::path base = program.parent_path().empty() ? fs::current_path() : fs::absolute(program.parent_path());
  cnp::NativeEnvironment env{{&std::cin, &std::cout}, base};

  cnp::PrimitiveRegistry registry;
  try {
    cnp::Manifest manifest = manifest_path.empty() ? cnp::Manifest{} : cnp::load_manifest(manifest_path);
    registry = cnp::build_registry(manifest, env, base);
  } catch (const cnp::Error& e) {
    std::cerr << "cnp: " << e.what() << '\n';
    return kExitLoad;
  }

  std::ofstream trace;
  if (!opt.trace.empty()) {
    trace.open(opt.trace, std::ios::trunc);
    if (!trace) {
      std::cerr << "cnp: cannot write " << opt.trace << '\n';
      return kExitLoad;
    }
    config.trace = &trace;
  }

  std::optional<cnp::Session> session;
  try {
    session.emplace(*net, registry, std::move(config));
  } catch (const cnp::Error& e) {
    std::cerr << program.string() << ": " << e.what() << '\n';
    return kExitLoad;
  }

  while (auto solution = session->next_solution()) {
    if (opt.print_paths) std::cout << "Path: " << cnp::path_to_json(solution->path) << '\n';
  }
  std::cout << "Number of solutions: " << session->solution_count() << '\n' << std::flush;

  switch (session->termination()) {
    case cnp::Termination::Exhausted:
    case cnp::Termination::SolutionLimit:
      return kExitOk;
    case cnp::Termination::DepthLimit:
      std::cerr << "cnp: search stopped at the depth limit\n";
      return kExitAborted;
    case cnp::Termination::Aborted:
      std::cerr << "cnp: run aborted: " << session->error() << '\n';
      return kExitAborted;
  }
  return kExitAborted;
}

int cmd_validate(const std::string& file) {
  fs::path program = file;
  if (fs::is_directory(program)) program /= "program.cn";
  std::string text;
  try {
    text = read_file(program);
  } catch (const cnp::IoError& e) {
    std::cerr << "cnp: " << e.what() << '\n';
    return kExitLoad;
  }
  try {
    cnp::parse(text);
  } catch (const cnp::ParseError& e) {
    std::cerr << program.string() << ':' << e.what() << '\n';
    return kExitLoad;
  } catch (const cnp::ValidationError& e) {
    for (const auto& d : e.diagnostics()) std::cout << program.string() << ':' << cnp::to_string(d) << '\n';
    return kExitLoad;
  }
  std::cout << program.string() << ": ok\n";
  return kExitOk;
}

int cmd_fmt(const std::string& file) {
  auto net = load_program(file);
  if (!net) return kExitLoad;
  std::cout << cnp::serialize(*net);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  // Dispatched by hand so worker arguments reach the worker untouched.
  if (argc >= 2 && std::string_view(argv[1]) == "fixture-worker") return fixture_worker(argc - 2, argv + 2);

  CLI::App app{"Control Network Programming runtime"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a program and print its solutions");
  run_cmd->add_option("program", run.program, "A .cn file, or a directory holding program.cn")->required();
  run_cmd->add_option("--manifest", run.manifest, "Primitive manifest (default: manifest.toml beside the program)");
  run_cmd->add_option("--var", run.vars, "Initial variable, name=value")->allow_extra_args(false);
  run_cmd->add_option("--max-solutions", run.max_solutions, "Stop after N solutions");
  run_cmd->add_option("--max-depth", run.max_depth, "Maximum trail length");
  run_cmd->add_option("--trace", run.trace, "Write JSON-lines search events to this file");
  run_cmd->add_flag("--print-paths", run.print_paths, "Print the arrow path of each solution");

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "Check a program for structural errors");
  validate_cmd->add_option("program", validate_file, "A .cn file or directory")->required();

  std::string fmt_file;
  auto* fmt_cmd = app.add_subcommand("fmt", "Print a program in canonical form");
  fmt_cmd->add_option("program", fmt_file, "A .cn file")->required();

  app.add_subcommand("fixture-worker", "Deterministic child process for protocol tests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitLoad;
  }

  if (*run_cmd) return cmd_run(run);
  if (*validate_cmd) return cmd_validate(validate_file);
  if (*fmt_cmd) return cmd_fmt(fmt_file);
  return kExitLoad;
}
