#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "solscale/qi.hpp"

namespace solscale {

inline constexpr int kMaxFlatDim = 3 * kMaxRank - 1;
using FlatVec = FixedVec<std::int64_t, kMaxFlatDim>;

// Largest |j| with gamma^{2j} <= 2^62, so attachment indices fit int64; capped at 40. Balls are
// only enumerable around indices below 2^52 (see NetSpace::for_each_in_ball).
int default_index_range(double gamma);

struct GluedSpaceSpec {
  GroupSpec base{1};
  std::vector<double> gammas{2.0};  // one per locus, each > 1
  int index_range = 0;              // J; 0 selects the smallest default over the gammas
  std::vector<int> flat_dims;       // empty selects 2n - 1 + i for locus i
};

class GluedPoint {
 public:
  GluedPoint() = default;
  static GluedPoint on_net(NetIndex idx);
  // Flat point with a nonzero lattice vector; GluedSpace::flat_point canonicalises zero.
  static GluedPoint in_flat(int locus, std::int64_t j, FlatVec v);

  bool is_net() const { return !flat_; }
  const NetIndex& net() const { return net_; }
  int locus() const { return locus_; }
  std::int64_t j() const { return j_; }
  const FlatVec& v() const { return v_; }

  friend bool operator==(const GluedPoint&, const GluedPoint&) = default;
  friend auto operator<=>(const GluedPoint& a, const GluedPoint& b) {
    if (a.flat_ != b.flat_) return a.flat_ <=> b.flat_;
    if (!a.flat_) return a.net_ <=> b.net_;
    if (a.locus_ != b.locus_) return a.locus_ <=> b.locus_;
    if (a.j_ != b.j_) return a.j_ <=> b.j_;
    return a.v_ <=> b.v_;
  }

 private:
  bool flat_ = false;
  NetIndex net_;
  int locus_ = 0;
  std::int64_t j_ = 0;
  FlatVec v_;
};

struct GluedPointHash {
  std::size_t operator()(const GluedPoint& p) const noexcept;
};

std::string to_string(const GluedPoint& p);

std::int64_t taxicab_norm(const FlatVec& v);

class GluedSpace {
 public:
  using Point = GluedPoint;
  using Hash = GluedPointHash;

  explicit GluedSpace(GluedSpaceSpec spec, double max_radius = 12.0, std::uint64_t budget = 10'000'000,
                      double tol = kDefaultTol);

  const GluedSpaceSpec& spec() const { return spec_; }
  const NetSpace& net_space() const { return net_; }
  int loci() const { return static_cast<int>(spec_.gammas.size()); }
  int index_range() const { return spec_.index_range; }
  double gamma(int locus) const;
  int flat_dim(int locus) const;

  // Loci are 1-based; j ranges over [-J, J].
  const NetIndex& attachment_point(int locus, std::int64_t j) const;
  const std::vector<std::pair<int, std::int64_t>>& attachments_at(const NetIndex& idx) const;
  int attachment_multiplicity(const NetIndex& idx) const { return static_cast<int>(attachments_at(idx).size()); }
  std::uint64_t attachment_pair_count() const;

  GluedPoint flat_point(int locus, std::int64_t j, FlatVec v) const;

  double distance(const GluedPoint& p, const GluedPoint& q) const;

  template <class F>
  void for_each_in_ball(const GluedPoint& c, double r, F&& fn) const;

 private:
  void check_locus(int locus) const;
  void check_index(int locus, std::int64_t j) const;
  template <class F>
  void for_each_flat_in_ball(int locus, std::int64_t j, const FlatVec& center, double rho, bool skip_zero,
                             F&& fn) const;

  GluedSpaceSpec spec_;
  NetSpace net_;
  double tol_;
  std::vector<std::vector<NetIndex>> table_;  // [locus-1][j + J]
  std::unordered_map<NetIndex, std::vector<std::pair<int, std::int64_t>>, NetIndexHash> at_;
};

double glued_distance(const GluedSpace& space, const GluedPoint& p, const GluedPoint& q);

// Box-restricted net set seen inside the glued space.
class GluedBoxSet {
 public:
  using Point = GluedPoint;
  explicit GluedBoxSet(NetBoxSet net) : net_(std::move(net)) {}
  const NetBoxSet& net() const { return net_; }
  bool contains(const GluedPoint& p) const { return p.is_net() && net_.contains(p.net()); }
  std::uint64_t size() const { return net_.size(); }
  template <class F>
  void for_each(F&& fn) const {
    net_.for_each([&](const NetIndex& idx) { fn(GluedPoint::on_net(idx)); });
  }

 private:
  NetBoxSet net_;
};

using GluedSet = FiniteSet<GluedPoint, GluedPointHash>;

// On N: gamma^2 on x_{2i-1}, gamma^{-1} on x_{2i}, then rounding. On flats of locus i:
// j -> j + 1 with (a, b, ...) -> (floor(a / gamma), b, ...). Other flats are fixed.
class GluedScalingMap {
 public:
  GluedScalingMap(const GluedSpace& space, int locus);

  const GluedSpace& space() const { return *space_; }
  int locus() const { return locus_; }
  const QiMap& net_map() const { return net_map_; }
  GluedPoint apply(const GluedPoint& p) const;

 private:
  const GluedSpace* space_;
  int locus_;
  double gamma_;
  QiMap net_map_;
};

std::uint64_t preimage_count(const GluedScalingMap& map, const GluedBoxSet& A, const NetOptions& opts = {});
std::uint64_t preimage_count(const GluedScalingMap& map, const GluedSet& A, const NetOptions& opts = {});
GluedSet preimage(const GluedScalingMap& map, const GluedSet& A, const NetOptions& opts = {});

// For j = 1..J: distance from round(m * x_{2i-1}-scaling of a_{i,j}) to the nearest a_{i,j'}.
std::vector<double> attachment_drift(const GluedSpace& space, double m, int locus, int J);

// Bound on attachment multiplicity for 1 < gamma: ceil(log_gamma 2) + 1.
int multiplicity_bound(double gamma);

// ---------------------------------------------------------------------------

template <class F>
void GluedSpace::for_each_flat_in_ball(int locus, std::int64_t j, const FlatVec& center, double rho, bool skip_zero,
                                       F&& fn) const {
  if (rho + tol_ < 0.0) return;
  const int d = flat_dim(locus);
  const std::int64_t R = static_cast<std::int64_t>(std::floor(rho + tol_));
  FlatVec off(d, 0);
  // Recursive walk over offsets with |off|_1 <= R.
  auto rec = [&](auto&& self, int axis, std::int64_t left) -> void {
    if (axis == d) {
      FlatVec w(d);
      bool zero = true;
      for (int a = 0; a < d; ++a) {
        w[a] = center[a] + off[a];
        zero = zero && w[a] == 0;
      }
      if (zero) {
        if (!skip_zero) fn(GluedPoint::on_net(attachment_point(locus, j)));
        return;
      }
      fn(GluedPoint::in_flat(locus, j, w));
      return;
    }
    for (std::int64_t o = -left; o <= left; ++o) {
      off[axis] = o;
      self(self, axis + 1, left - (o < 0 ? -o : o));
    }
    off[axis] = 0;
  };
  rec(rec, 0, R);
}

template <class F>
void GluedSpace::for_each_in_ball(const GluedPoint& c, double r, F&& fn) const {
  if (c.is_net()) {
    net_.for_each_in_ball(c.net(), r, [&](const NetIndex& y) {
      fn(GluedPoint::on_net(y));
      auto it = at_.find(y);
      if (it == at_.end()) return;
      const double rho = r - net_.distance(c.net(), y);
      for (const auto& [i, j] : it->second)
        for_each_flat_in_ball(i, j, FlatVec(flat_dim(i), 0), rho, true, fn);
    });
    return;
  }
  // Same flat: taxicab ball, including the attachment point when it is reached.
  for_each_flat_in_ball(c.locus(), c.j(), c.v(), r, false, fn);
  const double rho = r - static_cast<double>(taxicab_norm(c.v()));
  if (rho + tol_ < 0.0) return;
  const NetIndex& a = attachment_point(c.locus(), c.j());
  net_.for_each_in_ball(a, rho, [&](const NetIndex& y) {
    if (!(y == a)) fn(GluedPoint::on_net(y));
    auto it = at_.find(y);
    if (it == at_.end()) return;
    const double rest = rho - net_.distance(a, y);
    for (const auto& [i, j] : it->second) {
      if (i == c.locus() && j == c.j()) continue;
      for_each_flat_in_ball(i, j, FlatVec(flat_dim(i), 0), rest, true, fn);
    }
  });
}

}  // namespace solscale
