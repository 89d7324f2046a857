#pragma once

#include <vector>

#include "tbie/common.hpp"

namespace tbie::geometry {

enum class CurveKind { Circle, Star };

/// Smooth closed polar curve r(t) = a (1 + delta cos(m t)), t in [0, 2pi),
/// traversed counterclockwise. A circle is the delta = 0 case.
class ClosedCurve {
 public:
  CurveKind kind() const { return kind_; }
  double radius() const { return a_; }
  double delta() const { return delta_; }
  int lobes() const { return m_; }

  Point2 position(double t) const;
  /// dx/dt.
  Point2 derivative(double t) const;
  /// d^2x/dt^2.
  Point2 second_derivative(double t) const;
  double speed(double t) const;
  Point2 tangent(double t) const;
  /// Outward unit normal (from the inclusion into the exterior).
  Point2 normal(double t) const;
  /// Signed curvature, positive where the curve is convex.
  double curvature(double t) const;

  /// True when p lies strictly inside the inclusion.
  bool contains(Point2 p) const;
  /// Largest distance from the origin to a curve point.
  double max_radius() const { return a_ * (1.0 + delta_); }

 private:
  friend ClosedCurve circle(double a);
  friend ClosedCurve star(double a, double delta, int m);
  ClosedCurve(CurveKind kind, double a, double delta, int m)
      : kind_(kind), a_(a), delta_(delta), m_(m) {}

  double r(double t) const;
  double dr(double t) const;
  double d2r(double t) const;

  CurveKind kind_;
  double a_;
  double delta_;
  int m_;
};

ClosedCurve circle(double a);
/// Requires a > 0, m >= 3, 0 <= delta < 1.
ClosedCurve star(double a = 1.0, double delta = 0.3, int m = 5);

/// Nodal data at the equispaced parameters t_j = 2 pi j / N.
struct CurveDiscretization {
  ClosedCurve curve;
  int n = 0;
  std::vector<double> t;
  std::vector<Point2> points;
  std::vector<Point2> derivatives;
  std::vector<Point2> second_derivatives;
  std::vector<Point2> normals;
  std::vector<double> speeds;
  std::vector<double> curvatures;

  int size() const { return n; }
  double step() const { return 2.0 * kPi / n; }
  /// Largest arc-length spacing between neighbouring nodes (to first order).
  double mesh_spacing() const;
  /// Smallest distance from p to any node.
  double distance_to_nodes(Point2 p) const;
};

/// Requires N even and N >= 8.
CurveDiscretization sample(const ClosedCurve& curve, int n);

}  // namespace tbie::geometry
