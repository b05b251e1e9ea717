#pragma once

#include <stdexcept>
#include <string>

namespace o4ast {

enum class ErrorKind {
  Config,
  Shape,
  MalformedCode,
  EmptyRegion,
  EmptyDataset,
  Horizon,
  Numeric,
  IncompleteStore,
  Schema,
  IncompleteTable,
  NotFound,
  Format,
  Corruption,
  Validity,
  TooLarge,
  Io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace o4ast
