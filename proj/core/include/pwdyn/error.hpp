#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwdyn {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (bad interval, out-of-range count, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// `^` or `spow` with a non-literal (or out-of-range) exponent.
class ExponentNotLiteral : public ParseError {
public:
  using ParseError::ParseError;
};

// Domain error while evaluating an expression (log of non-positive, x/0, ...).
class EvalError : public Error {
public:
  EvalError(std::string node, const std::string& what)
      : Error(what + " in `" + node + "`"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

private:
  std::string node_;
};

class MapError : public Error {
public:
  using Error::Error;
};

class ExceptionalPoint : public Error {
public:
  explicit ExceptionalPoint(double x);
  double point() const noexcept { return x_; }

private:
  double x_;
};

class OutOfRange : public Error {
public:
  explicit OutOfRange(double x);
};

class OrbitHitsExceptional : public Error {
public:
  explicit OrbitHitsExceptional(std::size_t index);
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class DegenerateOrbit : public Error {
public:
  using Error::Error;
};

class BranchExplosion : public Error {
public:
  using Error::Error;
};

class NotDiffeomorphic : public Error {
public:
  using Error::Error;
};

class NeutralCoreNotBracketable : public Error {
public:
  using Error::Error;
};

class UNotCovering : public Error {
public:
  using Error::Error;
};

}  // namespace pwdyn
