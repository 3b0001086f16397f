#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cnp/error.hpp"
#include "cnp/model.hpp"

namespace cnp {

/// Raised by parse() when the text is syntactically fine but the network
/// breaks a structural rule.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Grammar (one statement per line, `#` starts a comment):
//
//   net NAME:
//     state NAME [init] [final] [visits=INT]
//     arrow NAME -> NAME [range=INT]: [item (; item)*]
//
//   item := NAME ( [arg (, arg)*] ) | call NAME
//   arg  := "string" | INT | $NAME | &NAME
ControlNetwork parse(std::string_view text);

/// Canonical text for a valid network. parse(serialize(n)) == n.
std::string serialize(const ControlNetwork& net);

std::string serialize(const Arg& arg);
std::string serialize(const CallItem& item);

}  // namespace cnp
