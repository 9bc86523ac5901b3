#include "solscale/qi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace solscale {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool nearly_equal(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b)); }

}  // namespace

CoordinateMap::CoordinateMap(std::vector<double> bx, std::vector<double> by, double left, double right)
    : bx_(std::move(bx)), by_(std::move(by)), left_slope_(left), right_slope_(right) {
  if (bx_.empty() || bx_.size() != by_.size()) throw DomainError("CoordinateMap: malformed knots");
  if (!std::isfinite(left) || !std::isfinite(right) || left == 0.0 || right == 0.0 ||
      (left > 0.0) != (right > 0.0))
    throw DomainError("CoordinateMap: slopes must be finite, nonzero and of one sign");
  for (std::size_t i = 0; i < bx_.size(); ++i) {
    if (!std::isfinite(bx_[i]) || !std::isfinite(by_[i])) throw DomainError("CoordinateMap: non-finite knot");
    if (i == 0) continue;
    if (!(bx_[i] > bx_[i - 1])) throw DomainError("CoordinateMap: breakpoints must increase strictly");
    if ((by_[i] > by_[i - 1]) != (left > 0.0) || by_[i] == by_[i - 1])
      throw DomainError("CoordinateMap: map must be strictly monotone");
  }
  // Drop knots where the slope does not change.
  const std::vector<double> sl = slopes();
  std::vector<double> nx, ny;
  for (std::size_t i = 0; i < bx_.size(); ++i) {
    if (nearly_equal(sl[i], sl[i + 1])) continue;
    nx.push_back(bx_[i]);
    ny.push_back(by_[i]);
  }
  if (nx.empty()) {
    // Affine: keep one knot, moved to x = 0.
    right_slope_ = left_slope_;
    nx.push_back(0.0);
    ny.push_back(by_[0] - left_slope_ * bx_[0]);
  }
  bx_ = std::move(nx);
  by_ = std::move(ny);
}

CoordinateMap CoordinateMap::affine(double slope, double offset) {
  if (!(slope != 0.0) || !std::isfinite(slope) || !std::isfinite(offset))
    throw DomainError("affine coordinate map needs a finite nonzero slope");
  return CoordinateMap({0.0}, {offset}, slope, slope);
}

CoordinateMap CoordinateMap::piecewise(std::vector<double> breaks, std::vector<double> slopes, double value_at_zero) {
  if (slopes.size() != breaks.size() + 1) throw DomainError("piecewise map: need one more slope than breakpoints");
  for (double s : slopes)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("piecewise map: slopes must be positive");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) throw DomainError("piecewise map: breakpoints must increase strictly");
  if (breaks.empty()) return affine(slopes[0], value_at_zero);
  // Segment z (slope slopes[z]) contains 0.
  const std::size_t z = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), 0.0) - breaks.begin());
  std::vector<double> ys(breaks.size());
  if (z < breaks.size()) {
    ys[z] = value_at_zero + slopes[z] * breaks[z];
    for (std::size_t i = z + 1; i < breaks.size(); ++i) ys[i] = ys[i - 1] + slopes[i] * (breaks[i] - breaks[i - 1]);
  }
  if (z > 0) {
    ys[z - 1] = value_at_zero + slopes[z] * breaks[z - 1];
    for (std::size_t i = z - 1; i-- > 0;) ys[i] = ys[i + 1] - slopes[i + 1] * (breaks[i + 1] - breaks[i]);
  }
  return CoordinateMap(std::move(breaks), std::move(ys), slopes.front(), slopes.back());
}

double CoordinateMap::operator()(double x) const {
  if (x < bx_.front()) return by_.front() + left_slope_ * (x - bx_.front());
  if (x >= bx_.back()) return by_.back() + right_slope_ * (x - bx_.back());
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(bx_.begin(), bx_.end(), x) - bx_.begin()) - 1;
  const double s = (by_[i + 1] - by_[i]) / (bx_[i + 1] - bx_[i]);
  return by_[i] + s * (x - bx_[i]);
}

CoordinateMap CoordinateMap::inverse() const {
  if (increasing()) return CoordinateMap(by_, bx_, 1.0 / left_slope_, 1.0 / right_slope_);
  std::vector<double> x(by_.rbegin(), by_.rend()), y(bx_.rbegin(), bx_.rend());
  return CoordinateMap(std::move(x), std::move(y), 1.0 / right_slope_, 1.0 / left_slope_);
}

double CoordinateMap::inverse_eval(double y) const {
  if (is_affine()) return (y - by_[0]) / left_slope_ + bx_[0];
  return inverse()(y);
}

CoordinateMap CoordinateMap::then(const CoordinateMap& outer) const {
  if (is_affine() && outer.is_affine()) return affine(left_slope_ * outer.left_slope_, outer((*this)(0.0)));
  std::vector<double> xs = bx_;
  for (double b : outer.bx_) xs.push_back(inverse_eval(b));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys;
  for (double x : xs) ys.push_back(outer((*this)(x)));
  const double left = left_slope_ * (increasing() ? outer.left_slope_ : outer.right_slope_);
  const double right = right_slope_ * (increasing() ? outer.right_slope_ : outer.left_slope_);
  return CoordinateMap(std::move(xs), std::move(ys), left, right);
}

bool CoordinateMap::is_affine() const { return bx_.size() == 1 && left_slope_ == right_slope_; }

std::vector<double> CoordinateMap::slopes() const {
  std::vector<double> s{left_slope_};
  for (std::size_t i = 0; i + 1 < bx_.size(); ++i) s.push_back((by_[i + 1] - by_[i]) / (bx_[i + 1] - bx_[i]));
  s.push_back(right_slope_);
  return s;
}

double CoordinateMap::lipschitz() const {
  double k = 1.0;
  for (double s : slopes()) k = std::max({k, std::fabs(s), 1.0 / std::fabs(s)});
  return k;
}

static void validate_stage(const GroupSpec& spec, const Stage& s) {
  std::visit(Overloaded{
                 [&](const CoordinateWise& c) {
                   if (static_cast<int>(c.maps.size()) != spec.x_dim())
                     throw DimensionError("coordinate stage needs one map per x-coordinate");
                 },
                 [&](const LeftTranslation& l) {
                   if (!(l.g.spec() == spec)) throw DimensionError("translation element has the wrong rank");
                 },
                 [&](const Permutation& p) {
                   if (static_cast<int>(p.sigma.size()) != spec.x_dim())
                     throw DimensionError("permutation needs 2n entries");
                   std::vector<int> seen(p.sigma.size(), 0);
                   for (int v : p.sigma) {
                     if (v < 0 || v >= spec.x_dim() || seen[static_cast<std::size_t>(v)]++)
                       throw DomainError("permutation entries must be a rearrangement of the coordinates");
                   }
                 },
                 [](const RoundToNet&) {},
             },
             s);
}

QiMap::QiMap(GroupSpec spec, std::vector<Stage> stages) : spec_(spec), stages_(std::move(stages)) {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    validate_stage(spec_, stages_[i]);
    if (std::holds_alternative<RoundToNet>(stages_[i]) && i + 1 != stages_.size())
      throw DomainError("rounding must be the final stage");
  }
}

QiMap QiMap::coordinate_wise(GroupSpec spec, std::vector<CoordinateMap> maps, bool round) {
  std::vector<Stage> st{CoordinateWise{std::move(maps)}};
  if (round) st.emplace_back(RoundToNet{});
  return QiMap(spec, std::move(st));
}

QiMap QiMap::scaling(GroupSpec spec, const std::vector<double>& slopes, bool round) {
  std::vector<CoordinateMap> maps;
  for (double s : slopes) maps.push_back(CoordinateMap::affine(s, 0.0));
  return coordinate_wise(spec, std::move(maps), round);
}

QiMap QiMap::with_rounding() const {
  if (rounds()) return *this;
  auto st = stages_;
  st.emplace_back(RoundToNet{});
  return QiMap(spec_, std::move(st));
}

QiMap QiMap::without_rounding() const {
  if (!rounds()) return *this;
  return QiMap(spec_, std::vector<Stage>(stages_.begin(), stages_.end() - 1));
}

static GroupPoint permute(const Permutation& p, const GroupPoint& q) {
  const XVec h = heights(q);
  XVec x(q.x().size()), hh(h.size());
  for (int i = 0; i < x.size(); ++i) {
    x[i] = q.x(p.sigma[static_cast<std::size_t>(i)]);
    hh[i] = h[p.sigma[static_cast<std::size_t>(i)]];
  }
  return GroupPoint(q.spec(), x, t_from_heights(hh.span()));
}

static Permutation inverse_perm(const Permutation& p) {
  Permutation inv;
  inv.sigma.assign(p.sigma.size(), 0);
  for (std::size_t i = 0; i < p.sigma.size(); ++i) inv.sigma[static_cast<std::size_t>(p.sigma[i])] = static_cast<int>(i);
  return inv;
}

GroupPoint apply_stage(const Stage& s, const GroupPoint& p) {
  return std::visit(Overloaded{
                        [&](const CoordinateWise& c) {
                          XVec x = p.x();
                          for (int i = 0; i < x.size(); ++i) x[i] = c.maps[static_cast<std::size_t>(i)](x[i]);
                          return GroupPoint(p.spec(), x, p.t());
                        },
                        [&](const LeftTranslation& l) { return multiply(l.g, p); },
                        [&](const Permutation& q) { return permute(q, p); },
                        [&](const RoundToNet&) { return p; },
                    },
                    s);
}

GroupPoint apply_stage_inverse(const Stage& s, const GroupPoint& p) {
  return std::visit(Overloaded{
                        [&](const CoordinateWise& c) {
                          XVec x = p.x();
                          for (int i = 0; i < x.size(); ++i)
                            x[i] = c.maps[static_cast<std::size_t>(i)].inverse_eval(x[i]);
                          return GroupPoint(p.spec(), x, p.t());
                        },
                        [&](const LeftTranslation& l) { return multiply(inverse(l.g), p); },
                        [&](const Permutation& q) { return permute(inverse_perm(q), p); },
                        [&](const RoundToNet&) { return p; },
                    },
                    s);
}

GroupPoint apply_continuous(const QiMap& map, const GroupPoint& p) {
  if (!(p.spec() == map.spec())) throw DimensionError("apply: point and map have different ranks");
  GroupPoint q = p;
  for (const Stage& s : map.stages()) q = apply_stage(s, q);
  return q;
}

GroupPoint apply_inverse_continuous(const QiMap& map, const GroupPoint& p) {
  if (!(p.spec() == map.spec())) throw DimensionError("apply: point and map have different ranks");
  GroupPoint q = p;
  for (auto it = map.stages().rbegin(); it != map.stages().rend(); ++it) q = apply_stage_inverse(*it, q);
  return q;
}

NetIndex apply_net(const QiMap& map, const NetIndex& idx, double snap_tol) {
  return round_to_net(apply_continuous(map, net_point(idx)), snap_tol);
}

static Stage invert_stage(const Stage& s) {
  return std::visit(Overloaded{
                        [](const CoordinateWise& c) -> Stage {
                          CoordinateWise out;
                          for (const auto& f : c.maps) out.maps.push_back(f.inverse());
                          return out;
                        },
                        [](const LeftTranslation& l) -> Stage { return LeftTranslation{inverse(l.g)}; },
                        [](const Permutation& p) -> Stage { return inverse_perm(p); },
                        [](const RoundToNet& r) -> Stage { return r; },
                    },
                    s);
}

QiMap inverse(const QiMap& map) {
  std::vector<Stage> st;
  const auto& src = map.stages();
  for (auto it = src.rbegin(); it != src.rend(); ++it)
    if (!std::holds_alternative<RoundToNet>(*it)) st.push_back(invert_stage(*it));
  if (map.rounds()) st.emplace_back(RoundToNet{});
  return QiMap(map.spec(), std::move(st));
}

QiMap compose(const QiMap& m1, const QiMap& m2) {
  if (!(m1.spec() == m2.spec())) throw DimensionError("compose: maps have different ranks");
  if (m1.rounds() && !m2.stages().empty())
    throw DomainError("compose: rounding of the first map would not be the final stage");
  std::vector<Stage> st;
  for (const auto* m : {&m1, &m2})
    for (const Stage& s : m->stages()) {
      if (!st.empty()) {
        auto* prev = std::get_if<CoordinateWise>(&st.back());
        const auto* cur = std::get_if<CoordinateWise>(&s);
        if (prev && cur) {
          for (std::size_t i = 0; i < prev->maps.size(); ++i) prev->maps[i] = prev->maps[i].then(cur->maps[i]);
          continue;
        }
      }
      st.push_back(s);
    }
  // Coordinate stages that collapsed to the identity carry no information.
  st.erase(std::remove_if(st.begin(), st.end(),
                          [](const Stage& s) {
                            const auto* c = std::get_if<CoordinateWise>(&s);
                            return c && std::all_of(c->maps.begin(), c->maps.end(),
                                                    [](const CoordinateMap& f) { return f.is_identity(); });
                          }),
           st.end());
  return QiMap(m1.spec(), std::move(st));
}

QiMap normalize_translations(const QiMap& map) {
  std::vector<Stage> st;
  for (const Stage& s : map.stages()) {
    const auto* l = std::get_if<LeftTranslation>(&s);
    if (!l) {
      st.push_back(s);
      continue;
    }
    TVec whole = l->g.t(), frac = l->g.t();
    bool fractional = false;
    for (int j = 0; j < whole.size(); ++j) {
      whole[j] = std::floor(l->g.t(j));
      frac[j] = l->g.t(j) - whole[j];
      fractional = fractional || frac[j] != 0.0;
    }
    if (!fractional) {
      st.push_back(s);
      continue;
    }
    const auto h = heights_of(frac.span());
    CoordinateWise scale;
    for (double v : h) scale.maps.push_back(CoordinateMap::affine(std::exp(v), 0.0));
    st.emplace_back(std::move(scale));
    st.emplace_back(LeftTranslation{GroupPoint(map.spec(), l->g.x(), whole)});
  }
  return QiMap(map.spec(), std::move(st));
}

double nominal_scaling(const QiMap& map) {
  double k = 1.0;
  for (const Stage& s : map.stages())
    if (const auto* c = std::get_if<CoordinateWise>(&s))
      for (const auto& f : c->maps) {
        if (!f.is_affine()) throw UnsupportedError("nominal scaling is defined for affine coordinate maps only");
        k /= std::fabs(f.slopes().front());
      }
  return k;
}

static Interval map_interval(const CoordinateMap& f, const Interval& iv, bool inverse_direction) {
  const double a = inverse_direction ? f.inverse_eval(iv.lo) : f(iv.lo);
  const double b = inverse_direction ? f.inverse_eval(iv.hi) : f(iv.hi);
  return {std::min(a, b), std::max(a, b)};
}

Box image_box(const QiMap& map, const Box& box) {
  if (!(box.spec() == map.spec())) throw DimensionError("image_box: rank mismatch");
  std::vector<Interval> x = box.x();
  for (const Stage& s : map.stages()) {
    if (std::holds_alternative<RoundToNet>(s)) continue;
    const auto* c = std::get_if<CoordinateWise>(&s);
    if (!c) throw UnsupportedError("image_box: only coordinate-wise stages map boxes to boxes here");
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = map_interval(c->maps[i], x[i], false);
  }
  return Box(std::move(x), box.t());
}

Box pullback_box(const QiMap& map, const Box& box) {
  if (!(box.spec() == map.spec())) throw DimensionError("pullback_box: rank mismatch");
  std::vector<Interval> x = box.x(), t = box.t();
  const auto& st = map.stages();
  for (auto it = st.rbegin(); it != st.rend(); ++it) {
    std::visit(Overloaded{
                   [&](const CoordinateWise& c) {
                     for (std::size_t i = 0; i < x.size(); ++i) x[i] = map_interval(c.maps[i], x[i], true);
                   },
                   [&](const LeftTranslation& l) {
                     const GroupPoint gi = inverse(l.g);
                     const XVec h = heights(gi);
                     for (std::size_t i = 0; i < x.size(); ++i) {
                       const double s = std::exp(h[static_cast<int>(i)]);
                       x[i] = {gi.x(static_cast<int>(i)) + s * x[i].lo, gi.x(static_cast<int>(i)) + s * x[i].hi};
                     }
                     for (std::size_t j = 0; j < t.size(); ++j)
                       t[j] = {t[j].lo + gi.t(static_cast<int>(j)), t[j].hi + gi.t(static_cast<int>(j))};
                   },
                   [&](const Permutation& p) {
                     // x_{sigma(i)} lies in the i-th target interval.
                     std::vector<Interval> nx(x.size());
                     for (std::size_t i = 0; i < x.size(); ++i) nx[static_cast<std::size_t>(p.sigma[i])] = x[i];
                     x = nx;
                     const Permutation inv = inverse_perm(p);
                     const int td = static_cast<int>(t.size());
                     std::vector<Interval> nt(t.size(), Interval{std::numeric_limits<double>::infinity(),
                                                                 -std::numeric_limits<double>::infinity()});
                     for (std::uint32_t bits = 0; bits < (1u << td); ++bits) {
                       TVec c(td);
                       for (int j = 0; j < td; ++j) c[j] = (bits >> j) & 1u ? t[static_cast<std::size_t>(j)].hi : t[static_cast<std::size_t>(j)].lo;
                       const auto h = heights_of(c.span());
                       XVec hh(h.size());
                       for (int i = 0; i < h.size(); ++i) hh[i] = h[inv.sigma[static_cast<std::size_t>(i)]];
                       const auto tc = t_from_heights(hh.span());
                       for (int j = 0; j < td; ++j) {
                         nt[static_cast<std::size_t>(j)].lo = std::min(nt[static_cast<std::size_t>(j)].lo, tc[j]);
                         nt[static_cast<std::size_t>(j)].hi = std::max(nt[static_cast<std::size_t>(j)].hi, tc[j]);
                       }
                     }
                     t = nt;
                   },
                   [](const RoundToNet&) {},
               },
               *it);
  }
  return Box(std::move(x), std::move(t));
}

namespace {

Box inflate(const Box& b) {
  auto grow = [](Interval iv) {
    const double pad = 1e-6 * (1.0 + std::max(std::fabs(iv.lo), std::fabs(iv.hi)));
    return Interval{iv.lo - pad, iv.hi + pad};
  };
  std::vector<Interval> x, t;
  for (const auto& iv : b.x()) x.push_back(grow(iv));
  for (const auto& iv : b.t()) t.push_back(grow(iv));
  return Box(std::move(x), std::move(t));
}

// Net points whose image under the map lands in the given region; `accept` decides membership.
template <class Accept, class Emit>
void pull_region(const QiMap& map, const Box& region, const NetOptions& opts, Accept&& accept, Emit&& emit) {
  const Box pb = inflate(pullback_box(map, region));
  for_each_net_point(
      pb,
      [&](const NetIndex& p) {
        const NetIndex img = apply_net(map, p, opts.snap_tol);
        if (accept(img)) emit(p);
      },
      opts);
}

Box slice_region(const KVec& k, const FixedVec<MRange, kMaxXDim>& ranges) {
  const XVec s = height_scales(k);
  std::vector<Interval> x, t;
  for (int i = 0; i < ranges.size(); ++i)
    x.push_back({s[i] * static_cast<double>(ranges[i].first), s[i] * static_cast<double>(ranges[i].last)});
  for (auto kj : k) t.push_back({static_cast<double>(kj), static_cast<double>(kj) + 1.0});
  return Box(std::move(x), std::move(t));
}

template <class Emit>
void preimage_boxset(const QiMap& map, const NetBoxSet& A, const NetOptions& opts, Emit&& emit) {
  if (!(A.box().spec() == map.spec())) throw DimensionError("preimage: rank mismatch");
  for (const auto& sl : A.slices()) {
    if (sl.count == 0) continue;
    pull_region(
        map, slice_region(sl.k, sl.ranges), opts,
        [&](const NetIndex& img) {
          if (!(img.k == sl.k)) return false;
          for (int i = 0; i < img.m.size(); ++i)
            if (img.m[i] < sl.ranges[i].first || img.m[i] >= sl.ranges[i].last) return false;
          return true;
        },
        emit);
  }
}

template <class Emit>
void preimage_finite(const QiMap& map, const NetSet& A, const NetOptions& opts, Emit&& emit) {
  std::map<KVec, std::vector<NetIndex>> groups;
  for (const NetIndex& a : A) {
    if (!(a.spec() == map.spec())) throw DimensionError("preimage: rank mismatch");
    groups[a.k].push_back(a);
  }
  for (const auto& [k, members] : groups) {
    FixedVec<MRange, kMaxXDim> hull;
    for (int i = 0; i < members.front().m.size(); ++i) {
      MRange r{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::min()};
      for (const auto& a : members) {
        r.first = std::min(r.first, a.m[i]);
        r.last = std::max(r.last, a.m[i] + 1);
      }
      hull.push_back(r);
    }
    double cells = 1.0;
    for (const auto& r : hull) cells *= static_cast<double>(r.count());
    if (cells <= 4.0 * static_cast<double>(members.size()) + 64.0) {
      pull_region(
          map, slice_region(k, hull), opts, [&](const NetIndex& img) { return img.k == k && A.contains(img); }, emit);
    } else {
      for (const auto& a : members)
        pull_region(map, box_of(a), opts, [&](const NetIndex& img) { return img == a; }, emit);
    }
  }
}

}  // namespace

NetSet preimage(const QiMap& map, const NetSet& A, const NetOptions& opts) {
  NetSet out;
  preimage_finite(map, A, opts, [&](const NetIndex& p) { out.insert(p); });
  return out;
}

NetSet preimage(const QiMap& map, const NetBoxSet& A, const NetOptions& opts) {
  NetSet out;
  preimage_boxset(map, A, opts, [&](const NetIndex& p) { out.insert(p); });
  return out;
}

std::uint64_t preimage_count(const QiMap& map, const NetSet& A, const NetOptions& opts) {
  std::uint64_t n = 0;
  preimage_finite(map, A, opts, [&](const NetIndex&) { ++n; });
  return n;
}

std::uint64_t preimage_count(const QiMap& map, const NetBoxSet& A, const NetOptions& opts) {
  std::uint64_t n = 0;
  preimage_boxset(map, A, opts, [&](const NetIndex&) { ++n; });
  return n;
}

double qi_constant_bound(const QiMap& map) {
  // A coordinate map with bi-Lipschitz constant L changes each hyperbolic factor distance by at
  // most 2 ln L + ln 2; translations and permutations are isometries; rounding moves each
  // image by at most the special-box diameter.
  double additive = 0.0;
  for (const Stage& s : map.stages())
    if (const auto* c = std::get_if<CoordinateWise>(&s)) {
      double worst = 0.0;
      for (const auto& f : c->maps) {
        const double L = f.lipschitz();
        if (L > 1.0) worst = std::max(worst, 2.0 * std::log(L) + std::log(2.0));
      }
      additive += worst;
    }
  return std::max(1.0, additive + 2.0 * special_box_diameter(map.spec()));
}

double qi_constant_for_pair(double d, double d_image) {
  const double upper = d_image / (d + 1.0);
  const double lower = (-d_image + std::sqrt(d_image * d_image + 4.0 * d)) / 2.0;
  return std::max(upper, lower);
}

}  // namespace solscale
