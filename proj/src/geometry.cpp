#include "tbie/geometry.hpp"

#include <algorithm>
#include <limits>

namespace tbie::geometry {

double ClosedCurve::r(double t) const { return a_ * (1.0 + delta_ * std::cos(m_ * t)); }

double ClosedCurve::dr(double t) const { return -a_ * delta_ * m_ * std::sin(m_ * t); }

double ClosedCurve::d2r(double t) const {
  return -a_ * delta_ * m_ * m_ * std::cos(m_ * t);
}

Point2 ClosedCurve::position(double t) const {
  const double rad = r(t);
  return {rad * std::cos(t), rad * std::sin(t)};
}

Point2 ClosedCurve::derivative(double t) const {
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double rad = r(t);
  const double rp = dr(t);
  return {rp * c - rad * s, rp * s + rad * c};
}

Point2 ClosedCurve::second_derivative(double t) const {
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double rad = r(t);
  const double rp = dr(t);
  const double rpp = d2r(t);
  // (r'' - r) e_r + 2 r' e_theta
  return {(rpp - rad) * c - 2.0 * rp * s, (rpp - rad) * s + 2.0 * rp * c};
}

double ClosedCurve::speed(double t) const { return norm(derivative(t)); }

Point2 ClosedCurve::tangent(double t) const {
  const Point2 d = derivative(t);
  return (1.0 / norm(d)) * d;
}

Point2 ClosedCurve::normal(double t) const {
  const Point2 d = derivative(t);
  return (1.0 / norm(d)) * Point2{d.y, -d.x};
}

double ClosedCurve::curvature(double t) const {
  const Point2 d = derivative(t);
  const Point2 dd = second_derivative(t);
  const double sp = norm(d);
  return (d.x * dd.y - d.y * dd.x) / (sp * sp * sp);
}

bool ClosedCurve::contains(Point2 p) const {
  const double rho = norm(p);
  if (rho == 0.0) return true;
  return rho < r(std::atan2(p.y, p.x));
}

ClosedCurve circle(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("circle: radius must be positive");
  return ClosedCurve(CurveKind::Circle, a, 0.0, 1);
}

ClosedCurve star(double a, double delta, int m) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("star: radius must be positive");
  if (m < 3) throw DomainError("star: lobe count must be >= 3");
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("star: need 0 <= delta < 1");
  return ClosedCurve(CurveKind::Star, a, delta, m);
}

double CurveDiscretization::mesh_spacing() const {
  return *std::max_element(speeds.begin(), speeds.end()) * step();
}

double CurveDiscretization::distance_to_nodes(Point2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : points) best = std::min(best, norm(p - x));
  return best;
}

CurveDiscretization sample(const ClosedCurve& curve, int n) {
  if (n < 8 || n % 2 != 0) throw DomainError("sample: N must be even and >= 8");
  CurveDiscretization disc{curve, n, {}, {}, {}, {}, {}, {}, {}};
  disc.t.resize(n);
  disc.points.resize(n);
  disc.derivatives.resize(n);
  disc.second_derivatives.resize(n);
  disc.normals.resize(n);
  disc.speeds.resize(n);
  disc.curvatures.resize(n);
  for (int j = 0; j < n; ++j) {
    // j / n first so that node j of N and node 2j of 2N are bitwise equal.
    const double t = 2.0 * kPi * (static_cast<double>(j) / n);
    disc.t[j] = t;
    disc.points[j] = curve.position(t);
    disc.derivatives[j] = curve.derivative(t);
    disc.second_derivatives[j] = curve.second_derivative(t);
    disc.normals[j] = curve.normal(t);
    disc.speeds[j] = curve.speed(t);
    disc.curvatures[j] = curve.curvature(t);
  }
  return disc;
}

}  // namespace tbie::geometry
