#include "cnp/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "cnp/error.hpp"

namespace cnp {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const toml::node& at, const std::string& message) const {
    const auto& where = at.source().begin;
    throw ManifestError(std::string(source_) + ":" + std::to_string(where.line) + ": " + message);
  }

  std::string text(const toml::node& node, std::string_view what) const {
    auto v = node.value<std::string>();
    if (!v || !node.is_string()) fail(node, std::string(what) + " must be a string");
    return *v;
  }

  std::vector<std::string> command(const toml::node& node, std::string_view what) const {
    if (node.is_string()) return split_command(*node.value<std::string>());
    if (const auto* arr = node.as_array()) {
      std::vector<std::string> out;
      for (const auto& elem : *arr) out.push_back(text(elem, what));
      return out;
    }
    fail(node, std::string(what) + " must be a string or an array of strings");
  }

  ParamSpec param(const toml::node& node) const {
    if (node.is_string()) {
      std::string name = *node.value<std::string>();
      if (!name.empty() && name.front() == '&') return {name.substr(1), ParamMode::Out, ParamKind::Text};
      return {name, ParamMode::In, ParamKind::Text};
    }
    const auto* table = node.as_table();
    if (!table) fail(node, "a parameter must be a string or a table");
    ParamSpec spec;
    for (const auto& [key, value] : *table) {
      if (key == "name") {
        spec.name = text(value, "param name");
      } else if (key == "mode") {
        auto mode = text(value, "param mode");
        if (mode == "in") spec.mode = ParamMode::In;
        else if (mode == "out") spec.mode = ParamMode::Out;
        else fail(value, "param mode must be \"in\" or \"out\"");
      } else if (key == "kind") {
        auto kind = text(value, "param kind");
        if (kind == "text") spec.kind = ParamKind::Text;
        else if (kind == "int") spec.kind = ParamKind::Int;
        else fail(value, "param kind must be \"text\" or \"int\"");
      } else {
        fail(value, "unknown param key '" + std::string(key.str()) + "'");
      }
    }
    if (spec.name.empty()) fail(node, "a parameter needs a name");
    return spec;
  }

  NativeEntry native(const toml::node& node) const {
    if (node.is_string()) {
      std::string name = *node.value<std::string>();
      return {name, name};
    }
    const auto* table = node.as_table();
    if (!table) fail(node, "a native must be a name or a table { name, use }");
    NativeEntry entry;
    for (const auto& [key, value] : *table) {
      if (key == "name") entry.name = text(value, "native name");
      else if (key == "use") entry.impl = text(value, "native use");
      else fail(value, "unknown native key '" + std::string(key.str()) + "'");
    }
    if (entry.name.empty()) fail(node, "a native needs a name");
    if (entry.impl.empty()) entry.impl = entry.name;
    return entry;
  }

  ForeignPrimitiveSpec foreign(const toml::table& table) const {
    ForeignPrimitiveSpec spec;
    bool has_forward = false;
    for (const auto& [key, value] : table) {
      if (key == "name") {
        spec.name = text(value, "name");
      } else if (key == "params") {
        const auto* arr = value.as_array();
        if (!arr) fail(value, "params must be an array");
        for (const auto& p : *arr) spec.params.push_back(param(p));
      } else if (key == "kind") {
        auto kind = text(value, "kind");
        if (kind == "action") spec.kind = PrimitiveKind::Action;
        else if (kind == "test") spec.kind = PrimitiveKind::Test;
        else if (kind == "combined") spec.kind = PrimitiveKind::Combined;
        else fail(value, "kind must be action, test or combined");
      } else if (key == "forward") {
        spec.forward_cmd = command(value, "forward");
        has_forward = true;
      } else if (key == "backward") {
        spec.backward_cmd = command(value, "backward");
      } else if (key == "wait") {
        auto wait = text(value, "wait");
        if (wait == "sync") spec.wait = WaitMode::Sync;
        else if (wait == "detached") spec.wait = WaitMode::Detached;
        else fail(value, "wait must be sync or detached");
      } else if (key == "capture") {
        auto capture = text(value, "capture");
        if (capture == "none") spec.capture = CaptureMode::None;
        else if (capture == "first_line") spec.capture = CaptureMode::FirstLine;
        else if (capture == "all_lines") spec.capture = CaptureMode::AllLines;
        else fail(value, "capture must be none, first_line or all_lines");
      } else if (key == "result_slot") {
        auto slot = value.value<std::int64_t>();
        if (!slot || !value.is_integer() || *slot < 0) fail(value, "result_slot must be a non-negative integer");
        spec.result_slot = static_cast<std::size_t>(*slot);
      } else if (key == "test_map") {
        const auto* map = value.as_table();
        if (!map) fail(value, "test_map must be a table");
        TestMap tm;
        for (const auto& [k, v] : *map) {
          if (k == "success") tm.success_token = text(v, "test_map.success");
          else if (k == "failure") tm.failure_token = text(v, "test_map.failure");
          else fail(v, "unknown test_map key '" + std::string(k.str()) + "'");
        }
        spec.test_map = tm;
      } else if (key == "undo_on_failure") {
        if (!value.is_boolean()) fail(value, "undo_on_failure must be a boolean");
        spec.undo_on_failure = *value.value<bool>();
      } else {
        fail(value, "unknown key '" + std::string(key.str()) + "'");
      }
    }
    if (spec.name.empty()) fail(table, "a [[foreign]] entry needs a name");
    if (!has_forward) fail(table, "foreign primitive '" + spec.name + "' needs a forward command");
    try {
      check_spec(spec);
    } catch (const ManifestError& e) {
      fail(table, e.what());
    }
    return spec;
  }

  Manifest manifest(const toml::table& root) const {
    Manifest m;
    for (const auto& [key, value] : root) {
      if (key == "natives") {
        const auto* arr = value.as_array();
        if (!arr) fail(value, "natives must be an array of names");
        for (const auto& n : *arr) m.natives.push_back(native(n));
      } else if (key == "foreign") {
        const auto* arr = value.as_array();
        if (!arr || !arr->is_array_of_tables()) fail(value, "foreign must be an array of tables ([[foreign]])");
        for (const auto& entry : *arr) m.foreigns.push_back(foreign(*entry.as_table()));
      } else {
        fail(value, "unknown key '" + std::string(key.str()) + "'");
      }
    }
    return m;
  }

 private:
  std::string_view source_;
};

}  // namespace

Manifest parse_manifest(std::string_view text, std::string_view source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw ManifestError(std::string(source_name) + ":" + std::to_string(e.source().begin.line) + ":" +
                        std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
  }
  Manifest m = Reader(source_name).manifest(root);
  check_manifest(m);
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

void check_manifest(const Manifest& manifest) {
  std::set<std::string, std::less<>> seen;
  const auto known = native_names();
  for (const auto& entry : manifest.natives) {
    if (std::find(known.begin(), known.end(), entry.impl) == known.end())
      throw ManifestError("unknown native primitive '" + entry.impl + "'");
    if (!is_identifier(entry.name)) throw ManifestError("'" + entry.name + "' is not a valid primitive name");
    if (!seen.insert(entry.name).second) throw ManifestError("primitive '" + entry.name + "' is listed twice");
  }
  for (const auto& spec : manifest.foreigns) {
    if (!is_identifier(spec.name)) throw ManifestError("'" + spec.name + "' is not a valid primitive name");
    if (!seen.insert(spec.name).second) throw ManifestError("primitive '" + spec.name + "' is listed twice");
  }
}

PrimitiveRegistry build_registry(const Manifest& manifest, const NativeEnvironment& env,
                                 const std::filesystem::path& working_dir) {
  check_manifest(manifest);
  PrimitiveRegistry registry;
  // Natives from one pack share state, so the whole set is created at once
  // and then registered under the names the program uses.
  std::vector<std::string> impls;
  for (const auto& entry : manifest.natives)
    if (std::find(impls.begin(), impls.end(), entry.impl) == impls.end()) impls.push_back(entry.impl);
  PrimitiveRegistry catalog;
  add_natives(catalog, impls, env);
  for (const auto& entry : manifest.natives) {
    PrimitiveDef def = *catalog.find(entry.impl);
    def.name = entry.name;
    registry.add(std::move(def));
  }
  for (const auto& spec : manifest.foreigns) registry.add(make_foreign_primitive(spec, working_dir));
  return registry;
}

}  // namespace cnp
