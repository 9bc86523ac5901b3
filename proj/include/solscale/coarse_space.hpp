#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <type_traits>
#include <utility>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "solscale/net.hpp"

namespace solscale {

template <class S>
concept MetricSpace = requires(const S& s, const typename S::Point& p, double r) {
  { s.distance(p, p) } -> std::convertible_to<double>;
  s.for_each_in_ball(p, r, [](const typename S::Point&) {});
};

template <class A, class P>
concept PointSet = requires(const A& a, const P& p) {
  { a.contains(p) } -> std::convertible_to<bool>;
  { a.size() } -> std::convertible_to<std::uint64_t>;
  a.for_each([](const P&) {});
};

template <class P, class Hash = std::hash<P>>
class FiniteSet {
 public:
  using Point = P;
  FiniteSet() = default;
  FiniteSet(std::initializer_list<P> pts) : set_(pts) {}
  template <class It>
  FiniteSet(It first, It last) : set_(first, last) {}

  bool insert(const P& p) { return set_.insert(p).second; }
  bool contains(const P& p) const { return set_.count(p) != 0; }
  std::uint64_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  void reserve(std::size_t n) { set_.reserve(n); }
  template <class F>
  void for_each(F&& fn) const {
    for (const P& p : set_) fn(p);
  }
  auto begin() const { return set_.begin(); }
  auto end() const { return set_.end(); }

  std::vector<P> sorted() const {
    std::vector<P> v(set_.begin(), set_.end());
    std::sort(v.begin(), v.end());
    return v;
  }

  friend bool operator==(const FiniteSet& a, const FiniteSet& b) { return a.set_ == b.set_; }

 private:
  std::unordered_set<P, Hash> set_;
};

using NetSet = FiniteSet<NetIndex, NetIndexHash>;

struct KVecHash {
  std::size_t operator()(const KVec& k) const noexcept {
    NetIndex idx;
    idx.k = k;
    return NetIndexHash{}(idx);
  }
};

// Box intersected with the net, kept implicit: membership and size without enumeration.
class NetBoxSet {
 public:
  using Point = NetIndex;
  explicit NetBoxSet(Box box, NetOptions opts = {});

  const Box& box() const { return box_; }
  bool contains(const NetIndex& idx) const;
  std::uint64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Height slices in lexicographic order with their m-ranges.
  struct Slice {
    KVec k;
    FixedVec<MRange, kMaxXDim> ranges;
    std::uint64_t count = 0;
  };
  const std::vector<Slice>& slices() const { return slices_; }
  const Slice* slice(const KVec& k) const {
    auto it = slice_of_.find(k);
    return it == slice_of_.end() ? nullptr : &slices_[it->second];
  }

  template <class F>
  void for_each(F&& fn) const {
    for (const Slice& sl : slices_) {
      if (sl.count == 0) continue;
      MVec m;
      for (const MRange& mr : sl.ranges) m.push_back(mr.first);
      NetIndex idx(sl.k, m);
      const int xd = sl.ranges.size();
      while (true) {
        fn(static_cast<const NetIndex&>(idx));
        int i = xd - 1;
        while (i >= 0) {
          if (++idx.m[i] < sl.ranges[i].last) break;
          idx.m[i] = sl.ranges[i].first;
          --i;
        }
        if (i < 0) break;
      }
    }
  }

  NetSet materialize() const;

 private:
  Box box_;
  NetOptions opts_;
  std::vector<Slice> slices_;
  std::unordered_map<KVec, std::size_t, KVecHash> slice_of_;
  std::uint64_t size_ = 0;
};

// Height offsets and per-factor windows for a ball of fixed radius; centre independent.
struct BallStencil {
  struct Entry {
    KVec dk;
    XVec scale;      // e^{dh_i}
    XVec inv_scale;  // e^{-dh_i}
    XVec reach;      // half-width of the x-window in units of the centre's scale
  };
  double radius = 0.0;
  std::vector<Entry> entries;
};

inline constexpr std::int64_t kMaxBallIndex = std::int64_t{1} << 52;

class NetSpace {
 public:
  using Point = NetIndex;
  using Hash = NetIndexHash;
  explicit NetSpace(GroupSpec spec = GroupSpec(1), double max_radius = 12.0,
                    std::uint64_t budget = 10'000'000, double tol = kDefaultTol);

  const GroupSpec& spec() const { return spec_; }
  double max_radius() const { return max_radius_; }
  double tol() const { return tol_; }

  double distance(const NetIndex& p, const NetIndex& q) const;

  // Throws RangeError for centres with |m_i| > 2^52, where unit neighbours coincide as doubles.
  template <class F>
  void for_each_in_ball(const NetIndex& c, double r, F&& fn) const {
    const BallStencil& st = stencil(r);
    for (auto v : c.m)
      if (v > kMaxBallIndex || v < -kMaxBallIndex) throw RangeError("ball: centre index beyond 2^52");
    const int xd = spec_.x_dim();
    std::array<std::vector<std::int64_t>, kMaxXDim> cand;
    NetIndex q;
    q.k = c.k;
    q.m = c.m;
    for (const auto& e : st.entries) {
      bool empty = false;
      for (int i = 0; i < xd && !empty; ++i) {
        auto& list = cand[static_cast<std::size_t>(i)];
        list.clear();
        const double mi = static_cast<double>(c.m[i]);
        const auto [lo, hi] = window(c, e, i);
        for (auto v = lo; v <= hi; ++v) {
          if (hyperbolic_distance(mi, 1.0, static_cast<double>(v) * e.scale[i], e.scale[i]) <= r + tol_)
            list.push_back(v);
        }
        empty = list.empty();
      }
      if (empty) continue;
      for (int j = 0; j < q.k.size(); ++j) q.k[j] = c.k[j] + e.dk[j];
      std::array<std::size_t, kMaxXDim> pos{};
      for (int i = 0; i < xd; ++i) q.m[i] = cand[static_cast<std::size_t>(i)][0];
      while (true) {
        fn(static_cast<const NetIndex&>(q));
        int i = xd - 1;
        while (i >= 0) {
          auto& list = cand[static_cast<std::size_t>(i)];
          if (++pos[static_cast<std::size_t>(i)] < list.size()) {
            q.m[i] = list[pos[static_cast<std::size_t>(i)]];
            break;
          }
          pos[static_cast<std::size_t>(i)] = 0;
          q.m[i] = list[0];
          --i;
        }
        if (i < 0) break;
      }
    }
  }

  const BallStencil& stencil(double r) const;

  // True when every candidate of the r-ball window around c lies in S, so c is interior.
  bool ball_inside(const NetIndex& c, double r, const NetBoxSet& S) const;

  // |boundary(S, r)| for a box set without visiting every ball: within one stencil height the
  // ball is a product of per-coordinate intervals, as is the box slice.
  std::uint64_t box_boundary_size(const NetBoxSet& S, double r) const;

 private:
  // Closed range of m'_i examined for stencil entry e around c, before the distance filter.
  static std::pair<std::int64_t, std::int64_t> window(const NetIndex& c, const BallStencil::Entry& e, int i) {
    const double mi = static_cast<double>(c.m[i]);
    const double lo = std::ceil((mi - e.reach[i]) * e.inv_scale[i] - 1e-7);
    const double hi = std::floor((mi + e.reach[i]) * e.inv_scale[i] + 1e-7);
    if (!(lo > -9e18 && hi < 9e18)) throw RangeError("ball: candidate indices leave the int64 range");
    return {static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)};
  }

  GroupSpec spec_;
  double max_radius_;
  std::uint64_t budget_;
  double tol_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const BallStencil>> stencils_;
};

template <class Space>
FiniteSet<typename Space::Point, typename Space::Hash> ball(const Space& space, const typename Space::Point& c,
                                                            double r) {
  FiniteSet<typename Space::Point, typename Space::Hash> out;
  space.for_each_in_ball(c, r, [&](const typename Space::Point& p) { out.insert(p); });
  return out;
}

template <class Space>
std::uint64_t ball_size(const Space& space, const typename Space::Point& c, double r) {
  std::uint64_t n = 0;
  space.for_each_in_ball(c, r, [&](const typename Space::Point&) { ++n; });
  return n;
}

// Points within r of S and within r of its complement. Members of S qualify when their
// ball leaves S; outside points qualify when they lie in the ball of some member.
template <class Space, class Set>
FiniteSet<typename Space::Point, typename Space::Hash> boundary(const Space& space, const Set& S, double r) {
  using P = typename Space::Point;
  FiniteSet<P, typename Space::Hash> out;
  S.for_each([&](const P& p) {
    if constexpr (std::is_same_v<Space, NetSpace> && std::is_same_v<Set, NetBoxSet>)
      if (space.ball_inside(p, r, S)) return;
    bool leaves = false;
    space.for_each_in_ball(p, r, [&](const P& q) {
      if (!S.contains(q)) {
        leaves = true;
        out.insert(q);
      }
    });
    if (leaves) out.insert(p);
  });
  return out;
}

template <class Space, class Set>
std::uint64_t boundary_size(const Space& space, const Set& S, double r) {
  if constexpr (std::is_same_v<Space, NetSpace> && std::is_same_v<Set, NetBoxSet>) return space.box_boundary_size(S, r);
  using P = typename Space::Point;
  FiniteSet<P, typename Space::Hash> outer;
  std::uint64_t inner = 0;
  S.for_each([&](const P& p) {
    if constexpr (std::is_same_v<Space, NetSpace> && std::is_same_v<Set, NetBoxSet>)
      if (space.ball_inside(p, r, S)) return;
    bool leaves = false;
    space.for_each_in_ball(p, r, [&](const P& q) {
      if (!S.contains(q)) {
        leaves = true;
        outer.insert(q);
      }
    });
    if (leaves) ++inner;
  });
  return inner + outer.size();
}

template <class Space, class Set>
double folner_ratio(const Space& space, const Set& S, double r) {
  if (S.size() == 0) throw DomainError("folner_ratio: empty set");
  return static_cast<double>(boundary_size(space, S, r)) / static_cast<double>(S.size());
}

// |ball(center, r)| for r = 0, 1, ..., r_max.
template <class Space>
std::vector<std::uint64_t> growth(const Space& space, const typename Space::Point& c, int r_max) {
  if (r_max < 0) throw DomainError("growth: negative radius");
  std::vector<std::uint64_t> counts;
  for (int r = 0; r <= r_max; ++r) counts.push_back(ball_size(space, c, r));
  return counts;
}

// Least-squares slope of log(count) against r (exponential rate) or log(r) (polynomial degree),
// over indices r_from..r_to of a growth curve.
double log_growth_rate(const std::vector<std::uint64_t>& counts, int r_from, int r_to);
double polynomial_growth_degree(const std::vector<std::uint64_t>& counts, int r_from, int r_to);

enum class HeightOrientation {
  Quoted,    // t_j in [-log a_j, log a_{j+1})
  GroupLaw,  // t_j in [-log a_{j+1}, log a_j), balanced for the group law used here
};

struct FolnerBoxOptions {
  double height_fraction = 1.0;
  HeightOrientation orientation = HeightOrientation::Quoted;
  std::vector<double> x_offset;  // lower x corner; zeros when empty
};

Box folner_box(const std::vector<double>& shape, const FolnerBoxOptions& opts = {});

// Measures of the r-neighbourhood region and the r-interior of a box in G.
// The interior is exact; the neighbourhood is a box-shaped superset.
struct ShellMeasure {
  double outer = 0.0;
  double inner = 0.0;
  double shell() const { return outer - inner; }
};
ShellMeasure g_shell_measure(const Box& box, double r);

// Numerical route for the interior measure at any rank (used to cross-check the closed form).
double interior_measure_numeric(const Box& box, double r, int panels = 64);

}  // namespace solscale
