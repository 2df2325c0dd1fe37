#pragma once

#include <stdexcept>
#include <string>

namespace lyapflow {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error
{
public:
  using Error::Error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

/// Thrown when a time argument hits a singularity of the schedule or field.
class SingularTimeError : public Error
{
public:
  using Error::Error;
};

class DivergenceError : public Error
{
public:
  DivergenceError(int step, const std::string& what)
    : Error(what + " (step " + std::to_string(step) + ")"), step_(step)
  {
  }
  int step() const { return step_; }

private:
  int step_;
};

class DegenerateTangentError : public Error
{
public:
  using Error::Error;
};

class MissingHistoryError : public Error
{
public:
  using Error::Error;
};

class OverflowError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace lyapflow
