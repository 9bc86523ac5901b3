#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "solscale/coarse_space.hpp"

namespace solscale {

// Monotone continuous piecewise-linear bijection of R, stored by its knots and end slopes.
// An affine map is the one-knot case.
class CoordinateMap {
 public:
  CoordinateMap() : CoordinateMap(affine(1.0, 0.0)) {}

  static CoordinateMap identity() { return affine(1.0, 0.0); }
  static CoordinateMap affine(double slope, double offset);
  // slopes.size() == breaks.size() + 1; anchored by f(0) = value_at_zero.
  static CoordinateMap piecewise(std::vector<double> breaks, std::vector<double> slopes, double value_at_zero = 0.0);

  double operator()(double x) const;
  double inverse_eval(double y) const;
  CoordinateMap inverse() const;
  // x -> outer(this(x))
  CoordinateMap then(const CoordinateMap& outer) const;

  bool increasing() const { return left_slope_ > 0.0; }
  bool is_affine() const;
  bool is_identity() const { return is_affine() && left_slope_ == 1.0 && (*this)(0.0) == 0.0; }
  // Slopes in order from -inf to +inf.
  std::vector<double> slopes() const;
  const std::vector<double>& knots_x() const { return bx_; }
  const std::vector<double>& knots_y() const { return by_; }
  double lipschitz() const;

  friend bool operator==(const CoordinateMap&, const CoordinateMap&) = default;

 private:
  CoordinateMap(std::vector<double> bx, std::vector<double> by, double left, double right);
  std::vector<double> bx_;
  std::vector<double> by_;
  double left_slope_ = 1.0;
  double right_slope_ = 1.0;
};

struct CoordinateWise {
  std::vector<CoordinateMap> maps;  // one per x-coordinate
  friend bool operator==(const CoordinateWise&, const CoordinateWise&) = default;
};

struct LeftTranslation {
  GroupPoint g;
  friend bool operator==(const LeftTranslation&, const LeftTranslation&) = default;
};

// Output coordinate i is input coordinate sigma[i] (0-based); heights follow the same
// permutation, which fixes the induced action on t. For n = 1 the swap gives t -> -t.
struct Permutation {
  std::vector<int> sigma;
  friend bool operator==(const Permutation&, const Permutation&) = default;
};

struct RoundToNet {
  friend bool operator==(const RoundToNet&, const RoundToNet&) = default;
};

using Stage = std::variant<CoordinateWise, LeftTranslation, Permutation, RoundToNet>;

class QiMap {
 public:
  explicit QiMap(GroupSpec spec = GroupSpec(1), std::vector<Stage> stages = {});

  static QiMap identity(GroupSpec spec) { return QiMap(spec); }
  static QiMap coordinate_wise(GroupSpec spec, std::vector<CoordinateMap> maps, bool round = false);
  // Affine slopes m_i with zero offsets.
  static QiMap scaling(GroupSpec spec, const std::vector<double>& slopes, bool round = false);

  const GroupSpec& spec() const { return spec_; }
  const std::vector<Stage>& stages() const { return stages_; }
  bool rounds() const { return !stages_.empty() && std::holds_alternative<RoundToNet>(stages_.back()); }
  QiMap with_rounding() const;
  QiMap without_rounding() const;

  friend bool operator==(const QiMap&, const QiMap&) = default;

 private:
  GroupSpec spec_;
  std::vector<Stage> stages_;
};

GroupPoint apply_stage(const Stage& s, const GroupPoint& p);
GroupPoint apply_stage_inverse(const Stage& s, const GroupPoint& p);

GroupPoint apply_continuous(const QiMap& map, const GroupPoint& p);
GroupPoint apply_inverse_continuous(const QiMap& map, const GroupPoint& p);
NetIndex apply_net(const QiMap& map, const NetIndex& idx, double snap_tol = kDefaultTol);

QiMap inverse(const QiMap& map);
// Stages of m1 followed by stages of m2, so compose(m1, m2)(p) = m2(m1(p)).
QiMap compose(const QiMap& m1, const QiMap& m2);

// Rewrites left translations by g = (x0, t0) as a coordinate scaling by e^{h(frac t0)} followed
// by the translation by (x0, floor t0). Agrees with the original on the net after rounding when
// the translation is the final continuous stage.
QiMap normalize_translations(const QiMap& map);

// Product of the nominal measure scalings 1 / prod(slopes) for affine coordinate stages.
double nominal_scaling(const QiMap& map);

Box image_box(const QiMap& map, const Box& box);
// Bounding box of the continuous preimage of a box (exact for coordinate maps, translations
// and the n = 1 swap).
Box pullback_box(const QiMap& map, const Box& box);

NetSet preimage(const QiMap& map, const NetSet& A, const NetOptions& opts = {});
NetSet preimage(const QiMap& map, const NetBoxSet& A, const NetOptions& opts = {});
std::uint64_t preimage_count(const QiMap& map, const NetSet& A, const NetOptions& opts = {});
std::uint64_t preimage_count(const QiMap& map, const NetBoxSet& A, const NetOptions& opts = {});

// K with (1/K) d - K <= d' <= K d + K for net pairs, from slopes, and the smallest K meeting a
// given observed pair.
double qi_constant_bound(const QiMap& map);
double qi_constant_for_pair(double d, double d_image);

}  // namespace solscale
