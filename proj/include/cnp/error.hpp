#pragma once

#include <stdexcept>
#include <string>

namespace cnp {

/// Base of every error raised by the runtime.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceSpan {
  int line = 1;
  int column = 1;

  bool operator==(const SourceSpan&) const = default;
};

class ParseError : public Error {
 public:
  ParseError(SourceSpan span, const std::string& message)
      : Error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
        span_(span),
        message_(message) {}

  SourceSpan span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  SourceSpan span_;
  std::string message_;
};

// Raised when a network cannot be loaded against a registry (unknown
// primitive, arity or mode mismatch at a call site).
class LoadError : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class WriteDuringBackward : public Error {
 public:
  explicit WriteDuringBackward(const std::string& name)
      : Error("write to variable '" + name + "' during backward execution") {}
};

class TypeMismatch : public Error {
 public:
  using Error::Error;
};

class ModeMismatch : public Error {
 public:
  using Error::Error;
};

class DuplicateName : public Error {
 public:
  explicit DuplicateName(const std::string& name)
      : Error("primitive '" + name + "' is already registered") {}
};

class PlaceholderOutOfRange : public Error {
 public:
  using Error::Error;
};

class SpawnError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyJournal : public Error {
 public:
  using Error::Error;
};

class NonPositiveInput : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

}  // namespace cnp
