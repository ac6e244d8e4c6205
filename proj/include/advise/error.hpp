#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace advise {

// Every error raised by the library carries a stable, machine-readable
// category so the CLI can report it without parsing messages.
class Error : public std::runtime_error {
public:
  Error(std::string_view category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  [[nodiscard]] std::string_view category() const noexcept { return category_; }

private:
  std::string_view category_;
};

// Rejected input: a precondition on an argument was violated.
class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

// An operation was attempted in a state that does not allow it.
class StateError : public Error {
public:
  explicit StateError(const std::string& what) : Error("state_error", what) {}
};

// Consistency estimation was asked for a pair that has never received feedback.
class NoFeedbackError : public Error {
public:
  explicit NoFeedbackError(const std::string& what) : Error("no_feedback", what) {}
};

class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error("config_error", field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class IoError : public Error {
public:
  IoError(std::string path, const std::string& what)
      : Error("io_error", path + ": " + what), path_(std::move(path)) {}

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail

}  // namespace advise
