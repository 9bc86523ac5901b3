#include "solscale/glued.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace solscale {

int default_index_range(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw DomainError("gamma must be a finite number > 1");
  const double J = std::floor(62.0 * std::log(2.0) / (2.0 * std::log(gamma)));
  return static_cast<int>(std::min(40.0, J));
}

int multiplicity_bound(double gamma) {
  if (!(gamma > 1.0)) throw DomainError("gamma must be > 1");
  return static_cast<int>(std::ceil(std::log(2.0) / std::log(gamma) - 1e-12)) + 1;
}

GluedPoint GluedPoint::on_net(NetIndex idx) {
  GluedPoint p;
  p.net_ = std::move(idx);
  return p;
}

GluedPoint GluedPoint::in_flat(int locus, std::int64_t j, FlatVec v) {
  GluedPoint p;
  p.flat_ = true;
  p.locus_ = locus;
  p.j_ = j;
  p.v_ = v;
  return p;
}

std::size_t GluedPointHash::operator()(const GluedPoint& p) const noexcept {
  if (p.is_net()) return NetIndexHash{}(p.net());
  std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(p.locus());
  auto mix = [&h](std::int64_t v) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  };
  mix(p.j());
  for (auto v : p.v()) mix(v);
  return static_cast<std::size_t>(h);
}

std::string to_string(const GluedPoint& p) {
  if (p.is_net()) return "net" + to_string(p.net());
  std::ostringstream os;
  os << "flat(i=" << p.locus() << ", j=" << p.j() << ", v=[";
  for (int a = 0; a < p.v().size(); ++a) os << (a ? "," : "") << p.v()[a];
  os << "])";
  return os.str();
}

std::int64_t taxicab_norm(const FlatVec& v) {
  std::int64_t s = 0;
  for (auto x : v) s += x < 0 ? -x : x;
  return s;
}

GluedSpace::GluedSpace(GluedSpaceSpec spec, double max_radius, std::uint64_t budget, double tol)
    : spec_(std::move(spec)), net_(spec_.base, max_radius, budget, tol), tol_(tol) {
  const int n = spec_.base.rank();
  if (static_cast<int>(spec_.gammas.size()) != n)
    throw DimensionError("glued space: need one gamma per locus (" + std::to_string(n) + ")");
  int J = std::numeric_limits<int>::max();
  for (double g : spec_.gammas) J = std::min(J, default_index_range(g));
  if (spec_.index_range == 0) spec_.index_range = J;
  if (spec_.index_range < 0 || spec_.index_range > J)
    throw RangeError("glued space: index range " + std::to_string(spec_.index_range) +
                     " exceeds the representable maximum " + std::to_string(J));
  if (spec_.flat_dims.empty())
    for (int i = 1; i <= n; ++i) spec_.flat_dims.push_back(2 * n - 1 + i);
  if (static_cast<int>(spec_.flat_dims.size()) != n) throw DimensionError("glued space: one flat dimension per locus");
  for (int d : spec_.flat_dims)
    if (d < 1 || d > kMaxFlatDim) throw DimensionError("glued space: flat dimension out of range");

  for (int i = 1; i <= n; ++i) {
    const double g = spec_.gammas[static_cast<std::size_t>(i - 1)];
    std::vector<NetIndex> row;
    for (std::int64_t j = -spec_.index_range; j <= spec_.index_range; ++j) {
      XVec x(spec_.base.x_dim(), 0.0);
      x[2 * i - 2] = std::pow(g, static_cast<double>(2 * j));
      x[2 * i - 1] = std::pow(g, static_cast<double>(-j));
      const NetIndex a = round_to_net(GroupPoint(spec_.base, x, TVec(spec_.base.t_dim(), 0.0)), tol);
      row.push_back(a);
      at_[a].emplace_back(i, j);
    }
    table_.push_back(std::move(row));
  }
}

double GluedSpace::gamma(int locus) const {
  check_locus(locus);
  return spec_.gammas[static_cast<std::size_t>(locus - 1)];
}

int GluedSpace::flat_dim(int locus) const {
  check_locus(locus);
  return spec_.flat_dims[static_cast<std::size_t>(locus - 1)];
}

void GluedSpace::check_locus(int locus) const {
  if (locus < 1 || locus > loci()) throw RangeError("glued space: locus " + std::to_string(locus) + " out of range");
}

void GluedSpace::check_index(int locus, std::int64_t j) const {
  check_locus(locus);
  if (j < -spec_.index_range || j > spec_.index_range)
    throw RangeError("glued space: attachment index " + std::to_string(j) + " outside [-" +
                     std::to_string(spec_.index_range) + ", " + std::to_string(spec_.index_range) + "]");
}

const NetIndex& GluedSpace::attachment_point(int locus, std::int64_t j) const {
  check_index(locus, j);
  return table_[static_cast<std::size_t>(locus - 1)][static_cast<std::size_t>(j + spec_.index_range)];
}

const std::vector<std::pair<int, std::int64_t>>& GluedSpace::attachments_at(const NetIndex& idx) const {
  static const std::vector<std::pair<int, std::int64_t>> none;
  auto it = at_.find(idx);
  return it == at_.end() ? none : it->second;
}

std::uint64_t GluedSpace::attachment_pair_count() const {
  return static_cast<std::uint64_t>(loci()) * static_cast<std::uint64_t>(2 * spec_.index_range + 1);
}

GluedPoint GluedSpace::flat_point(int locus, std::int64_t j, FlatVec v) const {
  check_index(locus, j);
  if (v.size() != flat_dim(locus)) throw DimensionError("flat point: wrong lattice dimension");
  if (taxicab_norm(v) == 0) return GluedPoint::on_net(attachment_point(locus, j));
  return GluedPoint::in_flat(locus, j, v);
}

static std::int64_t taxicab(const FlatVec& a, const FlatVec& b) {
  std::int64_t s = 0;
  for (int i = 0; i < a.size(); ++i) s += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return s;
}

double GluedSpace::distance(const GluedPoint& p, const GluedPoint& q) const {
  if (p.is_net() && q.is_net()) return net_.distance(p.net(), q.net());
  if (!p.is_net() && !q.is_net() && p.locus() == q.locus() && p.j() == q.j())
    return static_cast<double>(taxicab(p.v(), q.v()));
  // Route through the attachment point(s).
  auto anchor = [this](const GluedPoint& x) -> std::pair<NetIndex, double> {
    if (x.is_net()) return {x.net(), 0.0};
    return {attachment_point(x.locus(), x.j()), static_cast<double>(taxicab_norm(x.v()))};
  };
  const auto [a, da] = anchor(p);
  const auto [b, db] = anchor(q);
  return da + net_.distance(a, b) + db;
}

double glued_distance(const GluedSpace& space, const GluedPoint& p, const GluedPoint& q) {
  return space.distance(p, q);
}

GluedScalingMap::GluedScalingMap(const GluedSpace& space, int locus)
    : space_(&space), locus_(locus), gamma_(space.gamma(locus)) {
  std::vector<double> slopes(static_cast<std::size_t>(space.spec().base.x_dim()), 1.0);
  slopes[static_cast<std::size_t>(2 * locus - 2)] = gamma_ * gamma_;
  slopes[static_cast<std::size_t>(2 * locus - 1)] = 1.0 / gamma_;
  net_map_ = QiMap::scaling(space.spec().base, slopes, true);
}

GluedPoint GluedScalingMap::apply(const GluedPoint& p) const {
  if (p.is_net()) return GluedPoint::on_net(apply_net(net_map_, p.net()));
  if (p.locus() != locus_) return p;
  FlatVec w = p.v();
  w[0] = snap_floor(static_cast<double>(w[0]) / gamma_);
  return space_->flat_point(locus_, p.j() + 1, w);
}

namespace {

// Integers v with floor(v / gamma) == w.
std::int64_t floor_div_preimages(std::int64_t w, double gamma) {
  return snap_ceil(gamma * static_cast<double>(w + 1)) - snap_ceil(gamma * static_cast<double>(w));
}

// Flat sources mapped onto the attachment point a_{locus, j}: lattice vectors (v1, 0, ...) with
// 0 < v1 < gamma in flat j - 1.
std::uint64_t attachment_sources(const GluedScalingMap& map, const NetIndex& a) {
  std::uint64_t n = 0;
  const auto& space = map.space();
  for (const auto& [i, j] : space.attachments_at(a)) {
    if (i != map.locus() || j - 1 < -space.index_range()) continue;
    n += static_cast<std::uint64_t>(floor_div_preimages(0, space.gamma(i)) - 1);
  }
  return n;
}

}  // namespace

std::uint64_t preimage_count(const GluedScalingMap& map, const GluedBoxSet& A, const NetOptions& opts) {
  std::uint64_t n = preimage_count(map.net_map(), A.net(), opts);
  const auto& space = map.space();
  const int J = space.index_range();
  std::vector<NetIndex> seen;
  for (std::int64_t j = -J; j <= J; ++j) {
    const NetIndex& a = space.attachment_point(map.locus(), j);
    if (!A.net().contains(a) || std::find(seen.begin(), seen.end(), a) != seen.end()) continue;
    seen.push_back(a);
    n += attachment_sources(map, a);
  }
  return n;
}

std::uint64_t preimage_count(const GluedScalingMap& map, const GluedSet& A, const NetOptions& opts) {
  NetSet net_part;
  std::uint64_t n = 0;
  const auto& space = map.space();
  for (const GluedPoint& p : A) {
    if (p.is_net()) {
      net_part.insert(p.net());
      n += attachment_sources(map, p.net());
    } else if (p.locus() != map.locus()) {
      ++n;
    } else if (p.j() - 1 >= -space.index_range()) {
      n += static_cast<std::uint64_t>(floor_div_preimages(p.v()[0], space.gamma(p.locus())));
    }
  }
  return n + preimage_count(map.net_map(), net_part, opts);
}

GluedSet preimage(const GluedScalingMap& map, const GluedSet& A, const NetOptions& opts) {
  GluedSet out;
  NetSet net_part;
  const auto& space = map.space();
  const int L = map.locus();
  const double g = space.gamma(L);
  auto add_flat_sources = [&](std::int64_t j_target, const FlatVec& w) {
    if (j_target - 1 < -space.index_range()) return;
    const std::int64_t lo = snap_ceil(g * static_cast<double>(w[0]));
    const std::int64_t hi = snap_ceil(g * static_cast<double>(w[0] + 1));
    for (std::int64_t v1 = lo; v1 < hi; ++v1) {
      FlatVec v = w;
      v[0] = v1;
      if (taxicab_norm(v) == 0) continue;
      out.insert(GluedPoint::in_flat(L, j_target - 1, v));
    }
  };
  for (const GluedPoint& p : A) {
    if (p.is_net()) {
      net_part.insert(p.net());
      for (const auto& [i, j] : space.attachments_at(p.net()))
        if (i == L) add_flat_sources(j, FlatVec(space.flat_dim(L), 0));
    } else if (p.locus() != L) {
      out.insert(p);
    } else {
      add_flat_sources(p.j(), p.v());
    }
  }
  for (const NetIndex& q : preimage(map.net_map(), net_part, opts)) out.insert(GluedPoint::on_net(q));
  return out;
}

std::vector<double> attachment_drift(const GluedSpace& space, double m, int locus, int J) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("attachment_drift: slope must be positive");
  if (J < 1 || J >= space.index_range())
    throw RangeError("attachment_drift: J must lie in [1, " + std::to_string(space.index_range() - 1) + "]");
  const GroupSpec spec = space.spec().base;
  std::vector<double> slopes(static_cast<std::size_t>(spec.x_dim()), 1.0);
  slopes[static_cast<std::size_t>(2 * locus - 2)] = m;
  const QiMap scale = QiMap::scaling(spec, slopes, true);
  const NetSpace& net = space.net_space();
  std::vector<double> out;
  for (int j = 1; j <= J; ++j) {
    const NetIndex img = apply_net(scale, space.attachment_point(locus, j));
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t jj = -space.index_range(); jj <= space.index_range(); ++jj)
      best = std::min(best, net.distance(img, space.attachment_point(locus, jj)));
    out.push_back(best);
  }
  return out;
}

}  // namespace solscale
