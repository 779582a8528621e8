#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uxv {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- plan parsing ----

class MalformedJson : public Error {
 public:
  explicit MalformedJson(const std::string& what) : Error("malformed JSON: " + what) {}
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& msg)
      : Error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DanglingCondition : public Error {
 public:
  explicit DanglingCondition(std::int64_t command_id)
      : Error("condition of command " + std::to_string(command_id) +
              " references an unknown or invalid command"),
        command_id_(command_id) {}
  std::int64_t command_id() const noexcept { return command_id_; }

 private:
  std::int64_t command_id_;
};

class NonMonotonicTimestamps : public Error {
 public:
  explicit NonMonotonicTimestamps(std::string mission)
      : Error("timestamps of mission " + mission + " are not strictly ascending"),
        mission_(std::move(mission)) {}
  const std::string& mission() const noexcept { return mission_; }

 private:
  std::string mission_;
};

// ---- transformation / exploration ----

class InvalidPlan : public Error {
 public:
  using Error::Error;
};

class StateLimitExceeded : public Error {
 public:
  explicit StateLimitExceeded(std::size_t limit)
      : Error("state limit of " + std::to_string(limit) + " states exceeded"), limit_(limit) {}
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t limit_;
};

// ---- CTL ----

class CtlParseError : public Error {
 public:
  CtlParseError(std::size_t position, const std::string& msg)
      : Error("CTL parse error at " + std::to_string(position) + ": " + msg), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownAtom : public Error {
 public:
  explicit UnknownAtom(std::string name)
      : Error("unknown atomic proposition '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// ---- rules / geometry / world ----

class DegeneratePolygon : public Error {
 public:
  using Error::Error;
};

class RuleParseError : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  UnboundVariable(std::string rule, const std::string& variable)
      : Error("rule '" + rule + "' uses unbound variable " + variable), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class InvalidWorld : public Error {
 public:
  using Error::Error;
};

}  // namespace uxv
