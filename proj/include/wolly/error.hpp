#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wolly {

enum class ErrorCode {
  InvalidAngle,
  InvalidParameter,
  SyntaxError,
  SemanticError,
  WallCollision,
  LimitError,
  FormatError,
  CardError,
  NotListening,
  InvalidPhase,
  InvalidAnswer,
  SchemaError,
  UnknownEndpoint,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidAngle: return "invalid_angle";
    case ErrorCode::InvalidParameter: return "invalid_parameter";
    case ErrorCode::SyntaxError: return "syntax_error";
    case ErrorCode::SemanticError: return "semantic_error";
    case ErrorCode::WallCollision: return "wall_collision";
    case ErrorCode::LimitError: return "limit_error";
    case ErrorCode::FormatError: return "format_error";
    case ErrorCode::CardError: return "card_error";
    case ErrorCode::NotListening: return "not_listening";
    case ErrorCode::InvalidPhase: return "invalid_phase";
    case ErrorCode::InvalidAnswer: return "invalid_answer";
    case ErrorCode::SchemaError: return "schema_error";
    case ErrorCode::UnknownEndpoint: return "unknown_endpoint";
  }
  return "unknown";
}

// Base of every error raised by the library. code() is the stable identifier
// used on the wire; what() is a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidAngle : public Error {
 public:
  explicit InvalidAngle(const std::string& message) : Error(ErrorCode::InvalidAngle, message) {}
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& message)
      : Error(ErrorCode::InvalidParameter, message) {}
};

// Lines and columns are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, const std::string& message)
      : Error(ErrorCode::SyntaxError,
              std::to_string(line) + ":" + std::to_string(col) + ": " + message),
        line_(line),
        col_(col),
        detail_(message) {}

  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int col_;
  std::string detail_;
};

class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& message) : Error(ErrorCode::SemanticError, message) {}
};

class WallCollision : public Error {
 public:
  explicit WallCollision(const std::string& message) : Error(ErrorCode::WallCollision, message) {}
};

class LimitError : public Error {
 public:
  explicit LimitError(const std::string& message) : Error(ErrorCode::LimitError, message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error(ErrorCode::FormatError, message) {}
};

class CardError : public Error {
 public:
  CardError(std::string word, std::string reason)
      : Error(ErrorCode::CardError, "card '" + word + "': " + reason),
        word_(std::move(word)),
        reason_(std::move(reason)) {}

  const std::string& word() const noexcept { return word_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string word_;
  std::string reason_;
};

class NotListening : public Error {
 public:
  explicit NotListening(const std::string& message) : Error(ErrorCode::NotListening, message) {}
};

class InvalidPhase : public Error {
 public:
  explicit InvalidPhase(const std::string& message) : Error(ErrorCode::InvalidPhase, message) {}
};

class InvalidAnswer : public Error {
 public:
  explicit InvalidAnswer(const std::string& message) : Error(ErrorCode::InvalidAnswer, message) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::string field, std::string reason)
      : Error(ErrorCode::SchemaError,
              (field.empty() ? std::string("body") : field) + ": " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

class UnknownEndpoint : public Error {
 public:
  explicit UnknownEndpoint(const std::string& message)
      : Error(ErrorCode::UnknownEndpoint, message) {}
};

}  // namespace wolly
