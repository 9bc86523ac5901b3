#include "solscale/group_model.hpp"

#include <cmath>
#include <sstream>

namespace solscale {

GroupSpec::GroupSpec(int n) : n_(n) {
  if (n < 1 || n > kMaxRank) {
    throw DimensionError("GroupSpec: rank must be in [1, " + std::to_string(kMaxRank) + "], got " +
                         std::to_string(n));
  }
}

GroupPoint::GroupPoint(GroupSpec spec, XVec x, TVec t) : spec_(spec), x_(x), t_(t) {
  if (x_.size() != spec.x_dim() || t_.size() != spec.t_dim()) {
    throw DimensionError("GroupPoint: expected " + std::to_string(spec.x_dim()) + " x and " +
                         std::to_string(spec.t_dim()) + " t coordinates");
  }
  for (double v : x_)
    if (!std::isfinite(v)) throw DomainError("GroupPoint: non-finite coordinate");
  for (double v : t_)
    if (!std::isfinite(v)) throw DomainError("GroupPoint: non-finite coordinate");
}

GroupPoint sol_point(double a, double b, double c) { return GroupPoint(GroupSpec(1), XVec{a, b}, TVec{c}); }

XVec heights(const GroupPoint& p) { return heights_of(p.t().span()); }

GroupPoint identity(GroupSpec spec) {
  return GroupPoint(spec, XVec(spec.x_dim(), 0.0), TVec(spec.t_dim(), 0.0));
}

static void require_same(const GroupPoint& p, const GroupPoint& q) {
  if (!(p.spec() == q.spec())) throw DimensionError("group points of different rank");
}

GroupPoint multiply(const GroupPoint& p, const GroupPoint& q) {
  require_same(p, q);
  const XVec h = heights(p);
  XVec x(p.spec().x_dim());
  TVec t(p.spec().t_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = p.x(i) + std::exp(h[i]) * q.x(i);
  for (int j = 0; j < t.size(); ++j) t[j] = p.t(j) + q.t(j);
  return GroupPoint(p.spec(), x, t);
}

GroupPoint inverse(const GroupPoint& p) {
  const XVec h = heights(p);
  XVec x(p.spec().x_dim());
  TVec t(p.spec().t_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = -std::exp(-h[i]) * p.x(i);
  for (int j = 0; j < t.size(); ++j) t[j] = -p.t(j);
  return GroupPoint(p.spec(), x, t);
}

double hyperbolic_distance(double x1, double s1, double x2, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw DomainError("hyperbolic_distance: heights must be positive");
  if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(s1) || !std::isfinite(s2))
    throw DomainError("hyperbolic_distance: non-finite input");
  // arccosh(1 + z) written as 2 asinh(sqrt(z / 2)) to keep precision near 0.
  const double dx = x1 - x2;
  const double ds = s1 - s2;
  return 2.0 * std::asinh(std::hypot(dx, ds) / (2.0 * std::sqrt(s1 * s2)));
}

double quasi_distance(const GroupPoint& p, const GroupPoint& q) {
  require_same(p, q);
  const XVec hp = heights(p);
  const XVec hq = heights(q);
  double d = 0.0;
  for (int i = 0; i < hp.size(); ++i)
    d = std::max(d, hyperbolic_distance(p.x(i), std::exp(hp[i]), q.x(i), std::exp(hq[i])));
  return d;
}

std::string to_string(const GroupPoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(x=[";
  for (int i = 0; i < p.x().size(); ++i) os << (i ? "," : "") << p.x(i);
  os << "], t=[";
  for (int j = 0; j < p.t().size(); ++j) os << (j ? "," : "") << p.t(j);
  os << "])";
  return os.str();
}

}  // namespace solscale
