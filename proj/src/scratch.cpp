#include <fstream>
#include <sstream>

#include "cnp/error.hpp"
#include "cnp/foreign.hpp"

namespace cnp {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::filesystem::path& path, std::string_view data, std::ios::openmode mode) {
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

void scratch_write_positions(const std::filesystem::path& path, std::string_view monkey, std::string_view box) {
  std::string line;
  line.append(monkey).append(" ").append(box).append("\n");
  spill(path, line, std::ios::trunc);
}

std::pair<std::string, std::string> scratch_read_positions(const std::filesystem::path& path) {
  std::string data = slurp(path);
  std::string line = data.substr(0, data.find('\n'));
  auto space = line.find(' ');
  if (space == std::string::npos || line.find(' ', space + 1) != std::string::npos)
    throw IoError(path.string() + ": expected \"<monkey> <box>\"");
  return {line.substr(0, space), line.substr(space + 1)};
}

void scratch_append_step(const std::filesystem::path& path, std::string_view step) {
  std::string line(step);
  line += '\n';
  spill(path, line, std::ios::app);
}

std::vector<std::string> scratch_read_steps(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::string data = slurp(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t nl = data.find('\n', start);
    if (nl == std::string::npos) nl = data.size();
    lines.push_back(data.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string scratch_pop_step(const std::filesystem::path& path) {
  std::string data = slurp(path);
  if (data.empty()) throw EmptyJournal(path.string() + " has no step to remove");
  std::size_t end = data.back() == '\n' ? data.size() - 1 : data.size();
  std::size_t start = data.rfind('\n', end == 0 ? 0 : end - 1);
  start = (start == std::string::npos || end == 0) ? 0 : start + 1;
  std::string last = data.substr(start, end - start);
  data.resize(start);
  spill(path, data, std::ios::trunc);
  return last;
}

}  // namespace cnp
