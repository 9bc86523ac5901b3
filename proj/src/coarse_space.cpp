#include "solscale/coarse_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace solscale {

NetBoxSet::NetBoxSet(Box box, NetOptions opts) : box_(std::move(box)), opts_(opts) {
  for (const KVec& k : integer_heights(box_, opts_.snap_tol)) {
    Slice sl;
    sl.k = k;
    sl.ranges = m_ranges(box_, k, opts_.snap_tol);
    unsigned __int128 c = 1;
    for (const MRange& mr : sl.ranges) c *= static_cast<unsigned __int128>(mr.count());
    if (c > static_cast<unsigned __int128>(opts_.budget))
      throw ResourceError("NetBoxSet: slice exceeds the enumeration budget");
    sl.count = static_cast<std::uint64_t>(c);
    size_ += sl.count;
    if (size_ > opts_.budget) throw ResourceError("NetBoxSet: box exceeds the enumeration budget");
    slice_of_.emplace(k, slices_.size());
    slices_.push_back(sl);
  }
}

bool NetBoxSet::contains(const NetIndex& idx) const {
  auto it = slice_of_.find(idx.k);
  if (it == slice_of_.end()) return false;
  const Slice& sl = slices_[it->second];
  for (int i = 0; i < idx.m.size(); ++i)
    if (idx.m[i] < sl.ranges[i].first || idx.m[i] >= sl.ranges[i].last) return false;
  return true;
}

NetSet NetBoxSet::materialize() const {
  NetSet s;
  s.reserve(static_cast<std::size_t>(size_));
  for_each([&s](const NetIndex& p) { s.insert(p); });
  return s;
}

NetSpace::NetSpace(GroupSpec spec, double max_radius, std::uint64_t budget, double tol)
    : spec_(spec), max_radius_(max_radius), budget_(budget), tol_(tol) {
  if (!(max_radius >= 0.0)) throw DomainError("NetSpace: max radius must be nonnegative");
}

double NetSpace::distance(const NetIndex& p, const NetIndex& q) const {
  return quasi_distance(net_point(p), net_point(q));
}

bool NetSpace::ball_inside(const NetIndex& c, double r, const NetBoxSet& S) const {
  const BallStencil& st = stencil(r);
  KVec k = c.k;
  for (const auto& e : st.entries) {
    for (int j = 0; j < k.size(); ++j) k[j] = c.k[j] + e.dk[j];
    const NetBoxSet::Slice* sl = S.slice(k);
    for (int i = 0; i < spec_.x_dim(); ++i) {
      const auto [lo, hi] = window(c, e, i);
      if (lo > hi) break;  // empty window: no candidates at this height
      if (!sl || lo < sl->ranges[i].first || hi >= sl->ranges[i].last) return false;
    }
  }
  return true;
}

namespace {

// Sorted disjoint closed integer intervals.
using IntervalSet = std::vector<std::pair<std::int64_t, std::int64_t>>;

void add_interval(IntervalSet& s, std::int64_t a, std::int64_t b) { s.emplace_back(a, b); }

void normalize(IntervalSet& s) {
  std::sort(s.begin(), s.end());
  IntervalSet out;
  for (const auto& iv : s) {
    if (!out.empty() && iv.first <= out.back().second + 1)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  s = std::move(out);
}

bool covers(const IntervalSet& s, std::int64_t a, std::int64_t b) {
  auto it = std::upper_bound(s.begin(), s.end(), std::make_pair(a, std::numeric_limits<std::int64_t>::max()));
  if (it == s.begin()) return false;
  --it;
  return it->first <= a && b <= it->second;
}

}  // namespace

std::uint64_t NetSpace::box_boundary_size(const NetBoxSet& S, double r) const {
  const BallStencil& st = stencil(r);
  const int xd = spec_.x_dim();
  const double rr = r + tol_;

  struct Rect {
    std::array<IntervalSet, kMaxXDim> f;
  };
  std::map<KVec, std::vector<Rect>> reach;  // target height -> reachable products
  std::uint64_t inner = 0;

  for (const auto& sl : S.slices()) {
    if (sl.count == 0) continue;
    // Per entry and coordinate: filtered candidate interval [a, b] for each m in the slice range.
    struct Factor {
      std::vector<std::int64_t> a, b;  // a > b marks an empty list
      std::vector<std::uint8_t> out;   // nonempty list leaving the target range
    };
    std::vector<std::array<Factor, kMaxXDim>> per_entry(st.entries.size());
    std::vector<const NetBoxSet::Slice*> targets(st.entries.size());
    NetIndex c;
    c.k = sl.k;
    c.m = MVec(xd, 0);
    for (std::size_t ei = 0; ei < st.entries.size(); ++ei) {
      const auto& e = st.entries[ei];
      KVec kt = sl.k;
      for (int j = 0; j < kt.size(); ++j) kt[j] += e.dk[j];
      targets[ei] = S.slice(kt);
      Rect rect;
      bool any_empty_factor = false;
      for (int i = 0; i < xd; ++i) {
        Factor& F = per_entry[ei][static_cast<std::size_t>(i)];
        const MRange& mr = sl.ranges[i];
        const auto len = static_cast<std::size_t>(mr.count());
        F.a.resize(len);
        F.b.resize(len);
        F.out.assign(len, 0);
        bool some = false;
        for (std::size_t u = 0; u < len; ++u) {
          c.m[i] = mr.first + static_cast<std::int64_t>(u);
          const auto [lo, hi] = window(c, e, i);
          const double mi = static_cast<double>(c.m[i]);
          std::int64_t a = hi + 1, b = lo - 1;
          for (auto v = lo; v <= hi; ++v) {
            if (hyperbolic_distance(mi, 1.0, static_cast<double>(v) * e.scale[i], e.scale[i]) <= rr) {
              a = std::min(a, v);
              b = std::max(b, v);
            }
          }
          F.a[u] = a;
          F.b[u] = b;
          if (a <= b) {
            some = true;
            add_interval(rect.f[static_cast<std::size_t>(i)], a, b);
            const NetBoxSet::Slice* t = targets[ei];
            F.out[u] = !t || a < t->ranges[i].first || b >= t->ranges[i].last;
          }
        }
        if (!some) any_empty_factor = true;
        normalize(rect.f[static_cast<std::size_t>(i)]);
      }
      if (!any_empty_factor) reach[kt].push_back(std::move(rect));
    }

    // Members whose ball leaves S.
    std::array<std::size_t, kMaxXDim> pos{};
    const auto total = sl.count;
    for (std::uint64_t n = 0; n < total; ++n) {
      bool leaves = false;
      for (std::size_t ei = 0; ei < per_entry.size() && !leaves; ++ei) {
        bool nonempty = true, out = false;
        for (int i = 0; i < xd && nonempty; ++i) {
          const Factor& F = per_entry[ei][static_cast<std::size_t>(i)];
          const std::size_t u = pos[static_cast<std::size_t>(i)];
          nonempty = F.a[u] <= F.b[u];
          out = out || F.out[u];
        }
        leaves = nonempty && out;
      }
      inner += leaves;
      int i = xd - 1;
      while (i >= 0) {
        if (++pos[static_cast<std::size_t>(i)] < static_cast<std::size_t>(sl.ranges[i].count())) break;
        pos[static_cast<std::size_t>(i)] = 0;
        --i;
      }
    }
  }

  // Reachable points outside S, per target height, by coordinate compression.
  std::uint64_t outer = 0;
  for (const auto& [kt, rects] : reach) {
    const NetBoxSet::Slice* t = S.slice(kt);
    std::array<std::vector<std::int64_t>, kMaxXDim> cuts;
    for (int i = 0; i < xd; ++i) {
      auto& cv = cuts[static_cast<std::size_t>(i)];
      for (const auto& R : rects)
        for (const auto& iv : R.f[static_cast<std::size_t>(i)]) {
          cv.push_back(iv.first);
          cv.push_back(iv.second + 1);
        }
      if (t) {
        cv.push_back(t->ranges[i].first);
        cv.push_back(t->ranges[i].last);
      }
      std::sort(cv.begin(), cv.end());
      cv.erase(std::unique(cv.begin(), cv.end()), cv.end());
    }
    double cells = 1.0;
    for (int i = 0; i < xd; ++i) cells *= static_cast<double>(cuts[static_cast<std::size_t>(i)].size());
    if (cells > static_cast<double>(budget_)) throw ResourceError("box boundary: compressed grid exceeds budget");
    std::array<std::size_t, kMaxXDim> idx{};
    bool done = false;
    for (int i = 0; i < xd; ++i) done = done || cuts[static_cast<std::size_t>(i)].size() < 2;
    while (!done) {
      // Cell [cuts[i][idx], cuts[i][idx+1]) per coordinate.
      bool in_rect = false;
      for (const auto& R : rects) {
        bool all = true;
        for (int i = 0; i < xd && all; ++i) {
          const auto& cv = cuts[static_cast<std::size_t>(i)];
          all = covers(R.f[static_cast<std::size_t>(i)], cv[idx[static_cast<std::size_t>(i)]],
                       cv[idx[static_cast<std::size_t>(i)] + 1] - 1);
        }
        if (all) {
          in_rect = true;
          break;
        }
      }
      if (in_rect) {
        bool in_s = t != nullptr;
        std::uint64_t vol = 1;
        for (int i = 0; i < xd; ++i) {
          const auto& cv = cuts[static_cast<std::size_t>(i)];
          const std::int64_t a = cv[idx[static_cast<std::size_t>(i)]], b = cv[idx[static_cast<std::size_t>(i)] + 1];
          vol *= static_cast<std::uint64_t>(b - a);
          if (in_s) in_s = a >= t->ranges[i].first && b <= t->ranges[i].last;
        }
        if (!in_s) outer += vol;
      }
      int i = xd - 1;
      while (i >= 0) {
        auto& cv = cuts[static_cast<std::size_t>(i)];
        if (++idx[static_cast<std::size_t>(i)] + 1 < cv.size()) break;
        idx[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      done = i < 0;
    }
  }
  return inner + outer;
}

const BallStencil& NetSpace::stencil(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("ball: radius must be a nonnegative number");
  if (r > max_radius_)
    throw ResourceError("ball: radius " + std::to_string(r) + " exceeds the configured maximum " +
                        std::to_string(max_radius_));
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = stencils_.find(r); it != stencils_.end()) return *it->second;

  auto st = std::make_shared<BallStencil>();
  st->radius = r;
  const double reff = r + tol_;
  const int td = spec_.t_dim();
  const int n = spec_.rank();
  // |dt_j| <= min(j, 2n - j) * r for every point of the ball.
  KVec lim(td), dk(td);
  double cube = 1.0;
  for (int j = 0; j < td; ++j) {
    lim[j] = static_cast<std::int64_t>(std::floor(std::min(j + 1, 2 * n - j - 1) * reff));
    dk[j] = -lim[j];
    cube *= static_cast<double>(2 * lim[j] + 1);
  }
  if (cube > static_cast<double>(budget_)) throw ResourceError("ball: height window exceeds budget");
  const double ch = std::cosh(reff) - 1.0;
  while (true) {
    const auto dh = heights_of(dk.span());
    bool ok = true;
    for (auto v : dh) ok = ok && std::fabs(static_cast<double>(v)) <= reff;
    if (ok) {
      BallStencil::Entry e;
      e.dk = dk;
      for (auto v : dh) {
        const double E = std::exp(static_cast<double>(v));
        e.scale.push_back(E);
        e.inv_scale.push_back(1.0 / E);
        e.reach.push_back(std::sqrt(std::max(0.0, 2.0 * E * ch - (1.0 - E) * (1.0 - E))));
      }
      st->entries.push_back(e);
    }
    int j = td - 1;
    while (j >= 0) {
      if (++dk[j] <= lim[j]) break;
      dk[j] = -lim[j];
      --j;
    }
    if (j < 0) break;
  }
  auto [it, inserted] = stencils_.emplace(r, std::move(st));
  return *it->second;
}

static double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("growth fit: need at least two distinct radii");
  return (n * sxy - sx * sy) / den;
}

static void check_fit_range(const std::vector<std::uint64_t>& counts, int r_from, int r_to) {
  if (r_from < 0 || r_to <= r_from || static_cast<std::size_t>(r_to) >= counts.size())
    throw DomainError("growth fit: radius range outside the curve");
}

double log_growth_rate(const std::vector<std::uint64_t>& counts, int r_from, int r_to) {
  check_fit_range(counts, r_from, r_to);
  std::vector<double> xs, ys;
  for (int r = r_from; r <= r_to; ++r) {
    xs.push_back(r);
    ys.push_back(std::log(static_cast<double>(counts[static_cast<std::size_t>(r)])));
  }
  return fit_slope(xs, ys);
}

double polynomial_growth_degree(const std::vector<std::uint64_t>& counts, int r_from, int r_to) {
  check_fit_range(counts, r_from, r_to);
  if (r_from < 1) throw DomainError("growth degree: radii must start at 1");
  std::vector<double> xs, ys;
  for (int r = r_from; r <= r_to; ++r) {
    xs.push_back(std::log(static_cast<double>(r)));
    ys.push_back(std::log(static_cast<double>(counts[static_cast<std::size_t>(r)])));
  }
  return fit_slope(xs, ys);
}

Box folner_box(const std::vector<double>& shape, const FolnerBoxOptions& opts) {
  if (shape.size() < 2 || shape.size() % 2 != 0)
    throw DimensionError("folner_box: shape needs 2n side lengths");
  const GroupSpec spec(static_cast<int>(shape.size()) / 2);
  if (!(opts.height_fraction > 0.0) || !std::isfinite(opts.height_fraction))
    throw InvalidShapeError("folner_box: height fraction must be positive");
  if (!opts.x_offset.empty() && opts.x_offset.size() != shape.size())
    throw DimensionError("folner_box: offset needs one entry per x-coordinate");
  for (double a : shape)
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidShapeError("folner_box: side lengths must be positive");
  for (std::size_t i = 0; i + 1 < shape.size(); ++i)
    if (!(shape[i] * shape[i + 1] > 1.0))
      throw InvalidShapeError("folner_box: consecutive side lengths must have product > 1");

  std::vector<Interval> x, t;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double off = opts.x_offset.empty() ? 0.0 : opts.x_offset[i];
    x.push_back({off, off + shape[i]});
  }
  const double th = opts.height_fraction;
  for (int j = 0; j < spec.t_dim(); ++j) {
    const double la = std::log(shape[static_cast<std::size_t>(j)]);
    const double lb = std::log(shape[static_cast<std::size_t>(j) + 1]);
    if (opts.orientation == HeightOrientation::Quoted)
      t.push_back({-th * la, th * lb});
    else
      t.push_back({-th * lb, th * la});
  }
  return Box(std::move(x), std::move(t));
}

static int height_reach(int j, int n) { return std::min(j + 1, 2 * n - j - 1); }

// Integral over the t-box of prod_i (L_i + 2 sinh(r) e^{h_i(t)}), expanded into exponentials
// of linear forms.
static double outer_integral(const std::vector<double>& L, const std::vector<Interval>& T, double c) {
  const int xd = static_cast<int>(L.size());
  const int td = static_cast<int>(T.size());
  double total = 0.0;
  for (std::uint32_t U = 0; U < (1u << xd); ++U) {
    double coef = 1.0;
    std::vector<int> a(static_cast<std::size_t>(td), 0);
    for (int i = 0; i < xd; ++i) {
      if (U & (1u << i)) {
        coef *= c;
        if (i < td) a[static_cast<std::size_t>(i)] += 1;
        if (i >= 1) a[static_cast<std::size_t>(i - 1)] -= 1;
      } else {
        coef *= L[static_cast<std::size_t>(i)];
      }
    }
    if (coef == 0.0) continue;
    double integral = 1.0;
    for (int j = 0; j < td; ++j) {
      const double lo = T[static_cast<std::size_t>(j)].lo, hi = T[static_cast<std::size_t>(j)].hi;
      const int aj = a[static_cast<std::size_t>(j)];
      integral *= aj == 0 ? (hi - lo) : (std::exp(aj * hi) - std::exp(aj * lo)) / aj;
    }
    total += coef * integral;
  }
  return total;
}

static double inner_integral_sol(double L1, double L2, double a, double b, double c) {
  if (c == 0.0) return L1 * L2 * (b - a);
  const double lo = std::max(a, std::log(c / L2));
  const double hi = std::min(b, std::log(L1 / c));
  if (!(hi > lo)) return 0.0;
  return (L1 * L2 + c * c) * (hi - lo) - c * L1 * (std::exp(-lo) - std::exp(-hi)) -
         c * L2 * (std::exp(hi) - std::exp(lo));
}

static bool interior_t_box(const Box& box, double r, std::vector<Interval>& T) {
  const int n = box.spec().rank();
  T.clear();
  for (int j = 0; j < box.spec().t_dim(); ++j) {
    const double m = height_reach(j, n) * r;
    const Interval iv{box.t(j).lo + m, box.t(j).hi - m};
    if (!(iv.hi > iv.lo)) return false;
    T.push_back(iv);
  }
  return true;
}

double interior_measure_numeric(const Box& box, double r, int panels) {
  std::vector<Interval> T;
  if (!interior_t_box(box, r, T)) return 0.0;
  const int xd = box.spec().x_dim();
  const int td = box.spec().t_dim();
  const double c = 2.0 * std::sinh(r);
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const int per_dim = panels * 4;
  std::vector<std::vector<double>> nodes(static_cast<std::size_t>(td)), weights(static_cast<std::size_t>(td));
  for (int j = 0; j < td; ++j) {
    const double lo = T[static_cast<std::size_t>(j)].lo;
    const double h = T[static_cast<std::size_t>(j)].length() / panels;
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < 4; ++q) {
        nodes[static_cast<std::size_t>(j)].push_back(lo + h * (p + 0.5 * (gx[q] + 1.0)));
        weights[static_cast<std::size_t>(j)].push_back(0.5 * h * gw[q]);
      }
  }
  std::vector<int> pos(static_cast<std::size_t>(td), 0);
  double total = 0.0;
  TVec t(td);
  while (true) {
    double w = 1.0;
    for (int j = 0; j < td; ++j) {
      t[j] = nodes[static_cast<std::size_t>(j)][static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])];
      w *= weights[static_cast<std::size_t>(j)][static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])];
    }
    const auto h = heights_of(t.span());
    double f = 1.0;
    for (int i = 0; i < xd && f > 0.0; ++i) f *= std::max(0.0, box.x(i).length() - c * std::exp(h[i]));
    total += w * f;
    int j = td - 1;
    while (j >= 0) {
      if (++pos[static_cast<std::size_t>(j)] < per_dim) break;
      pos[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return total;
}

ShellMeasure g_shell_measure(const Box& box, double r) {
  if (!(r >= 0.0)) throw DomainError("g_shell_measure: radius must be nonnegative");
  const int n = box.spec().rank();
  const double c = 2.0 * std::sinh(r);
  std::vector<double> L;
  for (const auto& iv : box.x()) L.push_back(iv.length());

  ShellMeasure out;
  std::vector<Interval> Tout;
  for (int j = 0; j < box.spec().t_dim(); ++j) {
    const double m = height_reach(j, n) * r;
    Tout.push_back({box.t(j).lo - m, box.t(j).hi + m});
  }
  out.outer = outer_integral(L, Tout, c);

  std::vector<Interval> Tin;
  if (interior_t_box(box, r, Tin)) {
    if (n == 1) {
      out.inner = inner_integral_sol(L[0], L[1], Tin[0].lo, Tin[0].hi, c);
    } else {
      const int td = box.spec().t_dim();
      const int panels = std::max(2, static_cast<int>(std::pow(4.0e6, 1.0 / td) / 4.0));
      out.inner = interior_measure_numeric(box, r, panels);
    }
  }
  return out;
}

}  // namespace solscale
