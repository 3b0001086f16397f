#include "cnp/foreign.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <iostream>

#include "cnp/error.hpp"

extern char** environ;

namespace cnp {

void check_spec(const ForeignPrimitiveSpec& spec) {
  const std::string who = "foreign primitive '" + spec.name + "': ";
  if (spec.forward_cmd.empty()) throw ManifestError(who + "forward command is empty");
  if (spec.backward_cmd && spec.backward_cmd->empty()) throw ManifestError(who + "backward command is empty");
  if (spec.wait == WaitMode::Detached) {
    if (spec.capture != CaptureMode::None) throw ManifestError(who + "detached commands cannot capture output");
    if (spec.backward_cmd) throw ManifestError(who + "detached commands cannot have a backward command");
  }
  if (spec.test_map && spec.capture == CaptureMode::None)
    throw ManifestError(who + "a test token map needs captured output");
  if (spec.result_slot) {
    if (spec.capture == CaptureMode::None) throw ManifestError(who + "result_slot needs captured output");
    std::size_t outs = 0;
    for (const auto& p : spec.params) outs += p.mode == ParamMode::Out;
    if (*spec.result_slot >= outs) throw ManifestError(who + "result_slot does not name an output parameter");
  }
  if (spec.undo_on_failure && !spec.backward_cmd)
    throw ManifestError(who + "undo_on_failure needs a backward command");
  if (spec.kind == PrimitiveKind::Test && spec.backward_cmd)
    throw ManifestError(who + "test primitives have no backward command");
  std::size_t ins = 0;
  for (const auto& p : spec.params) ins += p.mode == ParamMode::In;
  auto check_tmpl = [&](const std::vector<std::string>& tmpl) {
    std::vector<std::string> probe(ins, "");
    try {
      render_command(tmpl, probe);
    } catch (const PlaceholderOutOfRange& e) {
      throw ManifestError(who + e.what());
    }
  };
  check_tmpl(spec.forward_cmd);
  if (spec.backward_cmd) check_tmpl(*spec.backward_cmd);
}

std::vector<std::string> split_command(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> render_command(const std::vector<std::string>& tmpl,
                                        const std::vector<std::string>& in_values) {
  std::vector<std::string> argv;
  argv.reserve(tmpl.size());
  for (const auto& token : tmpl) {
    std::string out;
    std::size_t i = 0;
    while (i < token.size()) {
      if (token[i] == '{') {
        std::size_t close = token.find('}', i + 1);
        if (close != std::string::npos && close > i + 1) {
          std::string_view digits(token.data() + i + 1, close - i - 1);
          bool numeric = digits.find_first_not_of("0123456789") == std::string_view::npos;
          if (numeric) {
            std::size_t index = digits.size() > 9 ? 0 : std::stoul(std::string(digits));
            if (index == 0 || index > in_values.size())
              throw PlaceholderOutOfRange("placeholder {" + std::string(digits) + "} but only " +
                                          std::to_string(in_values.size()) + " input value(s)");
            out += in_values[index - 1];
            i = close + 1;
            continue;
          }
        }
      }
      out += token[i++];
    }
    argv.push_back(std::move(out));
  }
  return argv;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      auto d = static_cast<unsigned char>(text[i + k]);
      if ((d & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (d & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

namespace {

std::string join(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

struct Argv {
  explicit Argv(const std::vector<std::string>& args) {
    for (const auto& a : args) ptrs.push_back(const_cast<char*>(a.c_str()));
    ptrs.push_back(nullptr);
  }
  char** data() { return ptrs.data(); }
  std::vector<char*> ptrs;
};

std::vector<std::string> split_lines(std::string_view data) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t nl = data.find('\n', start);
    std::size_t end = nl == std::string_view::npos ? data.size() : nl;
    std::string_view line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

void flush_console() {
  std::cout.flush();
  std::cerr.flush();
  std::fflush(nullptr);
}

}  // namespace

CapturedOutput run_sync(const std::vector<std::string>& argv, const ProcessOptions& options) {
  if (argv.empty()) throw SpawnError("empty command");
  const bool capture = options.capture != CaptureMode::None;

  int fds[2] = {-1, -1};
  if (capture && ::pipe2(fds, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (capture) posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  const std::string dir = options.working_dir.string();
  if (!dir.empty()) posix_spawn_file_actions_addchdir_np(&actions, dir.c_str());

  flush_console();
  Argv args(argv);
  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, args.data()[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (capture) ::close(fds[1]);
  if (rc != 0) {
    if (capture) ::close(fds[0]);
    throw SpawnError("cannot run '" + join(argv) + "': " + std::strerror(rc));
  }

  std::string data;
  if (capture) {
    char buf[4096];
    for (;;) {
      ssize_t n = ::read(fds[0], buf, sizeof buf);
      if (n > 0) {
        data.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        break;
      }
    }
    ::close(fds[0]);
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw SpawnError(std::string("waitpid: ") + std::strerror(errno));
  }

  if (capture && !is_valid_utf8(data)) throw DecodeError("output of '" + join(argv) + "' is not valid UTF-8");
  auto lines = split_lines(data);
  if (options.capture == CaptureMode::FirstLine && lines.size() > 1) lines.resize(1);
  return CapturedOutput{std::move(lines), decode_status(status)};
}

void spawn_detached(const std::vector<std::string>& argv, const std::filesystem::path& working_dir) {
  if (argv.empty()) throw SpawnError("empty command");
  int err_pipe[2];
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));

  const std::string dir = working_dir.string();
  Argv args(argv);
  flush_console();

  pid_t middle = ::fork();
  if (middle < 0) {
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    throw SpawnError(std::string("fork: ") + std::strerror(errno));
  }
  if (middle == 0) {
    // Double fork so the launched program is reparented and never becomes
    // our zombie.
    ::close(err_pipe[0]);
    ::setsid();
    pid_t child = ::fork();
    if (child != 0) ::_exit(child < 0 ? 127 : 0);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::close(devnull);
    }
    int e = 0;
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) {
      e = errno;
    } else {
      ::execvp(args.data()[0], args.data());
      e = errno;
    }
    [[maybe_unused]] auto w = ::write(err_pipe[1], &e, sizeof e);
    ::_exit(127);
  }

  ::close(err_pipe[1]);
  int status = 0;
  while (::waitpid(middle, &status, 0) < 0 && errno == EINTR) {
  }
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof child_errno))
    throw SpawnError("cannot run '" + join(argv) + "': " + std::strerror(child_errno));
  if (decode_status(status) != 0) throw SpawnError("cannot launch '" + join(argv) + "'");
}

Outcome interpret_outcome(const ForeignPrimitiveSpec& spec, const CapturedOutput& out, BoundArgs* bound) {
  const std::string who = "foreign primitive '" + spec.name + "'";
  if (out.exit_code != 0) return Outcome::error(who + " exited with code " + std::to_string(out.exit_code));

  if (spec.test_map) {
    if (out.lines.empty()) return Outcome::error("protocol error: " + who + " printed no test token");
    const std::string& token = out.lines.front();
    if (token != spec.test_map->success_token) {
      if (token == spec.test_map->failure_token) return Outcome::failure();
      return Outcome::error("protocol error: " + who + " printed \"" + token + "\", expected \"" +
                            spec.test_map->success_token + "\" or \"" + spec.test_map->failure_token + "\"");
    }
  }

  if (spec.result_slot) {
    if (out.lines.empty()) return Outcome::error("protocol error: " + who + " printed no result line");
    if (bound) {
      std::string value = out.lines.front();
      if (spec.capture == CaptureMode::AllLines) {
        for (std::size_t i = 1; i < out.lines.size(); ++i) value += "\n" + out.lines[i];
      }
      bound->set_output(*spec.result_slot, std::move(value));
    }
  }
  return Outcome::success();
}

PrimitiveDef make_foreign_primitive(ForeignPrimitiveSpec spec, std::filesystem::path working_dir) {
  check_spec(spec);
  PrimitiveDef def;
  def.name = spec.name;
  def.params = spec.params;
  def.kind = spec.kind;
  def.handler = [spec = std::move(spec), dir = std::move(working_dir)](Direction direction, BoundArgs& bound,
                                                                        ExecutionContext&) -> Outcome {
    auto run_backward = [&]() -> Outcome {
      CapturedOutput out = run_sync(render_command(*spec.backward_cmd, bound.in), {dir, CaptureMode::None});
      if (out.exit_code != 0)
        return Outcome::error("backward command of foreign primitive '" + spec.name + "' exited with code " +
                              std::to_string(out.exit_code));
      return Outcome::success();
    };

    if (direction == Direction::Backward) return spec.backward_cmd ? run_backward() : Outcome::success();

    auto argv = render_command(spec.forward_cmd, bound.in);
    if (spec.wait == WaitMode::Detached) {
      spawn_detached(argv, dir);
      return Outcome::success();
    }
    CapturedOutput out = run_sync(argv, {dir, spec.capture});
    Outcome outcome = interpret_outcome(spec, out, &bound);
    if (outcome.failed() && spec.undo_on_failure) {
      Outcome undo = run_backward();
      if (!undo.ok()) return undo;
    }
    return outcome;
  };
  return def;
}

}  // namespace cnp
