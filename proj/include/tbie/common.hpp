#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace tbie {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr Complex kI{0.0, 1.0};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.

/// Input outside a documented precondition or support box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation at a singular point of a function (e.g. Y_n or H_n at z = 0).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Result not representable in double precision.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Potential evaluation requested too close to the boundary.
class NearFieldError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Dense solve failed; carries the reciprocal condition estimate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// A contour quadrature node hit (or nearly hit) an eigenvalue.
class ContourHitError : public std::runtime_error {
 public:
  ContourHitError(const std::string& what, Complex node)
      : std::runtime_error(what), node_(node) {}
  Complex node() const { return node_; }

 private:
  Complex node_;
};

}  // namespace tbie
