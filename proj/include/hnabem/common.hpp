#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hnabem {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Error hierarchy. The CLI maps ConfigError/GeometryError to exit code 2 and
// NumericalError/DomainError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, int index = -1) : Error(what), index_(index) {}
  /// Offending vertex or side index, -1 when not applicable.
  int index() const { return index_; }

 private:
  int index_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hnabem
