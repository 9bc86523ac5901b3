#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "solscale/group_model.hpp"

namespace solscale {

using KVec = FixedVec<std::int64_t, kMaxTDim>;
using MVec = FixedVec<std::int64_t, kMaxXDim>;

// Index of the special box t^k x^m; its lower-left corner is a net point.
struct NetIndex {
  KVec k;
  MVec m;

  NetIndex() = default;
  NetIndex(KVec k_, MVec m_);
  int rank() const { return (m.size()) / 2; }
  GroupSpec spec() const { return GroupSpec(rank()); }

  friend bool operator==(const NetIndex&, const NetIndex&) = default;
  friend auto operator<=>(const NetIndex& a, const NetIndex& b) {
    if (auto c = a.k <=> b.k; c != 0) return c;
    return a.m <=> b.m;
  }
};

struct NetIndexHash {
  std::size_t operator()(const NetIndex& idx) const noexcept;
};

std::string to_string(const NetIndex& idx);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v < hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Product of half-open intervals in (x, t) coordinates.
class Box {
 public:
  Box() = default;
  Box(std::vector<Interval> x, std::vector<Interval> t);

  GroupSpec spec() const { return GroupSpec(static_cast<int>(x_.size()) / 2); }
  const std::vector<Interval>& x() const { return x_; }
  const std::vector<Interval>& t() const { return t_; }
  const Interval& x(int i) const { return x_[static_cast<std::size_t>(i)]; }
  const Interval& t(int j) const { return t_[static_cast<std::size_t>(j)]; }
  bool contains(const GroupPoint& p) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> x_;
  std::vector<Interval> t_;
};

std::string to_string(const Box& b);

struct NetOptions {
  double snap_tol = kDefaultTol;
  std::uint64_t budget = 10'000'000;
};

// floor/ceil of u, treating values within tol (plus a few ulps of u) of an integer as that integer.
std::int64_t snap_floor(double u, double tol = kDefaultTol);
std::int64_t snap_ceil(double u, double tol = kDefaultTol);

// e^{h_i(k)} for an integer height vector.
XVec height_scales(const KVec& k);

Box box_of(const NetIndex& idx);
NetIndex round_to_net(const GroupPoint& p, double snap_tol = kDefaultTol);
GroupPoint net_point(const NetIndex& idx);
double haar_measure(const Box& box);

// Integer height vectors k with k_j in [lo_j, hi_j) for the box's t-intervals.
std::vector<KVec> integer_heights(const Box& box, double snap_tol = kDefaultTol);

// Per-coordinate half-open m ranges [first, last) of net points in the box at height k.
struct MRange {
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::int64_t count() const { return last > first ? last - first : 0; }
};
FixedVec<MRange, kMaxXDim> m_ranges(const Box& box, const KVec& k, double snap_tol = kDefaultTol);

std::uint64_t count_net(const Box& box, const NetOptions& opts = {});
void for_each_net_point(const Box& box, const std::function<void(const NetIndex&)>& fn,
                        const NetOptions& opts = {});
std::vector<NetIndex> enumerate_net(const Box& box, const NetOptions& opts = {});

// Max quasi_distance between corners of the closed unit box. Each factor distance is
// convex in the log-height, so corners realise the diameter.
double special_box_diameter(GroupSpec spec);

// arccosh(3/2): distance between horizontally adjacent net points at equal height.
double net_separation_constant();

}  // namespace solscale
