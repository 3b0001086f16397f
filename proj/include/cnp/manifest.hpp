#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/foreign.hpp"
#include "cnp/natives.hpp"
#include "cnp/primitives.hpp"

namespace cnp {

/// The primitive roster of one program: which built-in natives to enable and
/// which external executables to wrap.
///
///   natives = ["Init", { name = "Print", use = "PrintFile" }]
///
///   [[foreign]]
///   name = "Walk"
///   params = [{ name = "from" }, { name = "to" }]
///   kind = "action"
///   forward = "python3 walk_fw.py {1} {2}"
///   backward = "python3 walk_bw.py {1} {2}"
struct NativeEntry {
  std::string name;  // name the program calls
  std::string impl;  // catalog name, usually the same

  bool operator==(const NativeEntry&) const = default;
};

struct Manifest {
  std::vector<NativeEntry> natives;
  std::vector<ForeignPrimitiveSpec> foreigns;
};

/// Throws ManifestError (with the file name and, when known, the line).
Manifest parse_manifest(std::string_view text, std::string_view source_name = "manifest");
Manifest load_manifest(const std::filesystem::path& path);

/// Throws ManifestError when a name appears twice across both lists or a
/// native is unknown.
void check_manifest(const Manifest& manifest);

/// Foreign commands run in `working_dir`; natives use `env`.
PrimitiveRegistry build_registry(const Manifest& manifest, const NativeEnvironment& env,
                                 const std::filesystem::path& working_dir);

}  // namespace cnp
