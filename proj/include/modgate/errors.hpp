#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modgate {

// Root of every error the library throws. Subclasses carry the data the
// caller needs to produce a diagnostic without string parsing.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileError : public Error {
 public:
  FileError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Malformed taxonomy schema file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(std::string raw)
      : Error("unknown label: \"" + raw + "\""), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class RecordError : public Error {
 public:
  enum class Cause { BadLabel, EmptyText, DuplicateId, Malformed };

  RecordError(std::size_t line, Cause cause, const std::string& detail)
      : Error("line " + std::to_string(line) + ": " + cause_name(cause) +
              (detail.empty() ? "" : ": " + detail)),
        line_(line),
        cause_(cause) {}

  std::size_t line() const noexcept { return line_; }
  Cause cause() const noexcept { return cause_; }

  static const char* cause_name(Cause c) noexcept {
    switch (c) {
      case Cause::BadLabel: return "bad label";
      case Cause::EmptyText: return "empty text";
      case Cause::DuplicateId: return "duplicate id";
      case Cause::Malformed: return "malformed record";
    }
    return "?";
  }

 private:
  std::size_t line_;
  Cause cause_;
};

class Underfull : public Error {
 public:
  Underfull(std::string category, std::size_t have, std::size_t need)
      : Error("Underfull " + category + " " + std::to_string(have) + "/" +
              std::to_string(need)),
        category_(std::move(category)),
        have_(have),
        need_(need) {}

  const std::string& category() const noexcept { return category_; }
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  std::string category_;
  std::size_t have_;
  std::size_t need_;
};

// Invalid prompt specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}

  // Last HTTP status seen, 0 for transport-level failures.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class TimeoutError : public ProviderError {
 public:
  explicit TimeoutError(const std::string& what) : ProviderError(what, 0) {}
};

class CacheError : public Error {
 public:
  using Error::Error;
};

class ReplayMiss : public ProviderError {
 public:
  ReplayMiss(std::string digest, const std::string& comment_id)
      : ProviderError("replay miss for comment " + comment_id + " (digest " +
                      digest + ")"),
        digest_(std::move(digest)) {}

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

// No recognizable label anywhere in a model response.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class EmptyMatrix : public Error {
 public:
  EmptyMatrix() : Error("confusion matrix is empty") {}
};

// Two runs in one comparison share a run id or a (prompt, model) cell.
class DuplicateRun : public Error {
 public:
  using Error::Error;
};

}  // namespace modgate
