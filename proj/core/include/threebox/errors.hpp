#pragma once

#include <stdexcept>
#include <string>

namespace threebox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A projection was requested onto a branch of (numerically) zero probability.
class ZeroProbabilityProjection : public Error {
 public:
  using Error::Error;
};

class InvalidContext : public Error {
 public:
  using Error::Error;
};

class SettleBeforeComplete : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class MissingGroundTruth : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RecordFormatError : public Error {
 public:
  using Error::Error;
};

class UnknownSession : public Error {
 public:
  using Error::Error;
};

class WrongPhase : public Error {
 public:
  using Error::Error;
};

}  // namespace threebox
