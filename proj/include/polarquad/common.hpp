#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polarquad {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid element definitions, bad flags.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-convergence, singular systems, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateElementError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NewtonFailure : public NumericalError {
 public:
  NewtonFailure(const std::string& what, Vec2 target)
      : NumericalError(what), target_(target) {}
  /// Planar point that could not be inverted.
  const Vec2& target() const { return target_; }

 private:
  Vec2 target_;
};

class OddRadialCountError : public NumericalError {
 public:
  OddRadialCountError(const std::string& what, double theta)
      : NumericalError(what), theta_(theta) {}
  double theta() const { return theta_; }

 private:
  double theta_;
};

/// Wrap an angle into [0, 2pi); values within 1e-12 of 2pi map to 0.
inline double canonical_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (kTwoPi - t < 1e-12) t = 0.0;
  return t;
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace polarquad
