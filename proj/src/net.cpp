#include "solscale/net.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace solscale {

NetIndex::NetIndex(KVec k_, MVec m_) : k(k_), m(m_) {
  if (m.size() < 2 || m.size() % 2 != 0 || k.size() != m.size() - 1)
    throw DimensionError("NetIndex: need 2n-1 heights and 2n positions");
}

std::size_t NetIndexHash::operator()(const NetIndex& idx) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::int64_t v) {
    std::uint64_t z = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h ^= z ^ (z >> 31);
  };
  for (auto v : idx.k) mix(v);
  for (auto v : idx.m) mix(v);
  return static_cast<std::size_t>(h);
}

std::string to_string(const NetIndex& idx) {
  std::ostringstream os;
  os << "(k=[";
  for (int j = 0; j < idx.k.size(); ++j) os << (j ? "," : "") << idx.k[j];
  os << "], m=[";
  for (int i = 0; i < idx.m.size(); ++i) os << (i ? "," : "") << idx.m[i];
  os << "])";
  return os.str();
}

Box::Box(std::vector<Interval> x, std::vector<Interval> t) : x_(std::move(x)), t_(std::move(t)) {
  if (x_.size() < 2 || x_.size() % 2 != 0 || t_.size() + 1 != x_.size())
    throw DimensionError("Box: need 2n x-intervals and 2n-1 t-intervals");
  GroupSpec check(static_cast<int>(x_.size()) / 2);
  (void)check;
  for (const auto* v : {&x_, &t_})
    for (const Interval& iv : *v)
      if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw InvalidShapeError("Box: every interval needs finite lo < hi");
}

bool Box::contains(const GroupPoint& p) const {
  if (!(p.spec() == spec())) throw DimensionError("Box::contains: rank mismatch");
  for (int i = 0; i < p.x().size(); ++i)
    if (!x(i).contains(p.x(i))) return false;
  for (int j = 0; j < p.t().size(); ++j)
    if (!t(j).contains(p.t(j))) return false;
  return true;
}

std::string to_string(const Box& b) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto* v : {&b.x(), &b.t()})
    for (const Interval& iv : *v) {
      os << (first ? "" : "x") << "[" << iv.lo << "," << iv.hi << ")";
      first = false;
    }
  return os.str();
}

static std::int64_t checked_int(double v) {
  if (!(std::fabs(v) < 9.0e18)) throw RangeError("net coordinate exceeds the int64 range");
  return static_cast<std::int64_t>(v);
}

// Absolute tolerance plus a few ulps of u, so exact corners survive the e^{h} e^{-h} round trip.
static bool near_integer(double u, double r, double tol) {
  return std::fabs(u - r) <= tol + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(u);
}

std::int64_t snap_floor(double u, double tol) {
  const double r = std::nearbyint(u);
  if (near_integer(u, r, tol)) return checked_int(r);
  return checked_int(std::floor(u));
}

std::int64_t snap_ceil(double u, double tol) {
  const double r = std::nearbyint(u);
  if (near_integer(u, r, tol)) return checked_int(r);
  return checked_int(std::ceil(u));
}

XVec height_scales(const KVec& k) {
  const auto h = heights_of(k.span());
  XVec s(h.size());
  for (int i = 0; i < h.size(); ++i) s[i] = std::exp(static_cast<double>(h[i]));
  return s;
}

Box box_of(const NetIndex& idx) {
  const XVec s = height_scales(idx.k);
  std::vector<Interval> x, t;
  for (int i = 0; i < idx.m.size(); ++i) {
    const double m = static_cast<double>(idx.m[i]);
    x.push_back({s[i] * m, s[i] * (m + 1.0)});
  }
  for (int j = 0; j < idx.k.size(); ++j) {
    const double k = static_cast<double>(idx.k[j]);
    t.push_back({k, k + 1.0});
  }
  return Box(std::move(x), std::move(t));
}

NetIndex round_to_net(const GroupPoint& p, double snap_tol) {
  KVec k;
  for (double tj : p.t()) k.push_back(snap_floor(tj, snap_tol));
  const auto h = heights_of(k.span());
  MVec m;
  for (int i = 0; i < p.x().size(); ++i)
    m.push_back(snap_floor(p.x(i) * std::exp(-static_cast<double>(h[i])), snap_tol));
  return NetIndex(k, m);
}

GroupPoint net_point(const NetIndex& idx) {
  const XVec s = height_scales(idx.k);
  XVec x(idx.m.size());
  TVec t(idx.k.size());
  for (int i = 0; i < x.size(); ++i) x[i] = s[i] * static_cast<double>(idx.m[i]);
  for (int j = 0; j < t.size(); ++j) t[j] = static_cast<double>(idx.k[j]);
  return GroupPoint(idx.spec(), x, t);
}

double haar_measure(const Box& box) {
  double mu = 1.0;
  for (const auto& iv : box.x()) mu *= iv.length();
  for (const auto& iv : box.t()) mu *= iv.length();
  return mu;
}

std::vector<KVec> integer_heights(const Box& box, double snap_tol) {
  const int td = static_cast<int>(box.t().size());
  std::vector<std::int64_t> lo(static_cast<std::size_t>(td)), hi(static_cast<std::size_t>(td));
  double total = 1.0;
  for (int j = 0; j < td; ++j) {
    lo[static_cast<std::size_t>(j)] = snap_ceil(box.t(j).lo, snap_tol);
    hi[static_cast<std::size_t>(j)] = snap_ceil(box.t(j).hi, snap_tol);
    if (hi[static_cast<std::size_t>(j)] <= lo[static_cast<std::size_t>(j)]) return {};
    total *= static_cast<double>(hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]);
  }
  if (total > 1e7) throw ResourceError("integer_heights: too many height vectors");
  std::vector<KVec> out;
  KVec k;
  for (int j = 0; j < td; ++j) k.push_back(lo[static_cast<std::size_t>(j)]);
  while (true) {
    out.push_back(k);
    int j = td - 1;
    while (j >= 0) {
      if (++k[j] < hi[static_cast<std::size_t>(j)]) break;
      k[j] = lo[static_cast<std::size_t>(j)];
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

FixedVec<MRange, kMaxXDim> m_ranges(const Box& box, const KVec& k, double snap_tol) {
  const XVec s = height_scales(k);
  FixedVec<MRange, kMaxXDim> r;
  for (int i = 0; i < s.size(); ++i) {
    MRange mr;
    mr.first = snap_ceil(box.x(i).lo / s[i], snap_tol);
    mr.last = snap_ceil(box.x(i).hi / s[i], snap_tol);
    r.push_back(mr);
  }
  return r;
}

std::uint64_t count_net(const Box& box, const NetOptions& opts) {
  unsigned __int128 total = 0;
  for (const KVec& k : integer_heights(box, opts.snap_tol)) {
    unsigned __int128 prod = 1;
    for (const MRange& mr : m_ranges(box, k, opts.snap_tol)) {
      prod *= static_cast<unsigned __int128>(mr.count());
      if (prod == 0) break;
      if (prod > std::numeric_limits<std::uint64_t>::max()) throw RangeError("count_net: overflow");
    }
    total += prod;
    if (total > std::numeric_limits<std::uint64_t>::max()) throw RangeError("count_net: overflow");
  }
  return static_cast<std::uint64_t>(total);
}

void for_each_net_point(const Box& box, const std::function<void(const NetIndex&)>& fn,
                        const NetOptions& opts) {
  const std::uint64_t total = count_net(box, opts);
  if (total > opts.budget)
    throw ResourceError("enumerate_net: " + std::to_string(total) + " points exceed budget " +
                        std::to_string(opts.budget));
  for (const KVec& k : integer_heights(box, opts.snap_tol)) {
    const auto ranges = m_ranges(box, k, opts.snap_tol);
    bool empty = false;
    for (const MRange& mr : ranges) empty = empty || mr.count() == 0;
    if (empty) continue;
    MVec m;
    for (const MRange& mr : ranges) m.push_back(mr.first);
    NetIndex idx(k, m);
    const int xd = ranges.size();
    while (true) {
      fn(idx);
      int i = xd - 1;
      while (i >= 0) {
        if (++idx.m[i] < ranges[i].last) break;
        idx.m[i] = ranges[i].first;
        --i;
      }
      if (i < 0) break;
    }
  }
}

std::vector<NetIndex> enumerate_net(const Box& box, const NetOptions& opts) {
  std::vector<NetIndex> out;
  for_each_net_point(box, [&out](const NetIndex& idx) { out.push_back(idx); }, opts);
  return out;
}

double special_box_diameter(GroupSpec spec) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(spec.rank()); it != cache.end()) return it->second;

  const int xd = spec.x_dim();
  const int dim = xd + spec.t_dim();
  std::vector<GroupPoint> corners;
  for (std::uint32_t bits = 0; bits < (1u << dim); ++bits) {
    XVec x(xd);
    TVec t(spec.t_dim());
    for (int i = 0; i < xd; ++i) x[i] = (bits >> i) & 1u;
    for (int j = 0; j < spec.t_dim(); ++j) t[j] = (bits >> (xd + j)) & 1u;
    corners.emplace_back(spec, x, t);
  }
  double d = 0.0;
  for (std::size_t a = 0; a < corners.size(); ++a)
    for (std::size_t b = a + 1; b < corners.size(); ++b) d = std::max(d, quasi_distance(corners[a], corners[b]));
  cache[spec.rank()] = d;
  return d;
}

double net_separation_constant() { return std::acosh(1.5); }

}  // namespace solscale
