#pragma once

#include <stdexcept>
#include <string>

namespace densehar {

// Error family. Each family maps to a distinct process exit code so shell
// callers can tell a bad config from a bad dataset without parsing stderr.
enum class ErrorKind {
  Generic = 1,
  Config = 2,
  Ingestion = 3,
  Geometry = 4,
  Label = 5,
  Format = 6,
  Dimension = 7,
  Input = 8,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Label: return "label";
    case ErrorKind::Format: return "format";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Input: return "input";
    default: return "error";
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};
struct IngestionError : Error {
  explicit IngestionError(const std::string& what) : Error(ErrorKind::Ingestion, what) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& what) : Error(ErrorKind::Geometry, what) {}
};
struct LabelError : Error {
  explicit LabelError(const std::string& what) : Error(ErrorKind::Label, what) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};
struct InputError : Error {
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

}  // namespace densehar
