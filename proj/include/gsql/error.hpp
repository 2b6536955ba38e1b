#pragma once

#include <stdexcept>
#include <string>

namespace gsql {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Relaxation parameter outside (0, w*]. Carries both values so callers can
/// report the admissible range.
class RelaxationOutOfRange : public Error {
 public:
  RelaxationOutOfRange(double w, double w_star, const std::string& context = {});

  double w() const noexcept { return w_; }
  double w_star() const noexcept { return w_star_; }

 private:
  double w_;
  double w_star_;
};

/// Malformed JSON or a document that does not match the expected layout.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration that parsed but failed validation. `field` is the
/// dotted path of the offending key.
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message);

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gsql
