#pragma once

#include <stdexcept>
#include <string>

namespace virac {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite or geometrically degenerate inputs to math operations.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Scenario / trajectory / template file rejected; message names the
// offending field or line.
class LoadError : public Error {
 public:
  using Error::Error;
};

// A stated pre/postcondition was violated at runtime (fabricated object id,
// decreasing history timestamp, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Remote backend transport or protocol failure (timeout, non-2xx,
// unparseable body) after retries are exhausted.
class BackendError : public Error {
 public:
  using Error::Error;
};

// A structurally valid response whose content violates the documented
// schema. Never degraded to a default action.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Prompt template problems: unknown placeholder at load, unresolvable
// placeholder at render.
class TemplateError : public Error {
 public:
  using Error::Error;
};

// Perception backend failed; carries the backend diagnostics.
class PerceptionError : public Error {
 public:
  using Error::Error;
};

// Goal decomposition backend failed.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

// An action references a target that is not resolvable from the current
// observation, memory, or scenario.
class ActionTargetError : public Error {
 public:
  using Error::Error;
};

// Aggregate report cannot be built (missing scenario/condition/method cell).
class ReportError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures while writing run artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace virac
