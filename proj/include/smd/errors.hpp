#pragma once

#include <stdexcept>
#include <string>

namespace smd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point that should lie in a feasible region does not.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Regularizer/region (or cone query/region) combination that is not supported.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A linear objective is constant on more than one vertex.
class GenericityError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration; `path()` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace smd
