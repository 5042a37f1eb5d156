#pragma once

#include <stdexcept>
#include <string>

namespace travkit {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1; anything else escaping a subcommand is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// maskproc
class NoCandidate : public Error {
 public:
  using Error::Error;
};

class EmptyMask : public Error {
 public:
  using Error::Error;
};

// dataset pipeline
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_shape_mismatch(const std::string& what, int w1, int h1, int w2, int h2);

}  // namespace travkit
