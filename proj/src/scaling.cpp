#include "solscale/scaling.hpp"

#include <algorithm>

namespace solscale {

std::vector<double> FamilyProfile::folner_ratios() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    out.push_back(static_cast<double>(boundary_sizes[i]) / static_cast<double>(sizes[i]));
  return out;
}

bool FamilyProfile::decaying() const {
  const auto r = folner_ratios();
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] < r[i - 1])) return false;
  return true;
}

bool ratios_converged(const std::vector<double>& ratios, int window, double tol) {
  if (window < 2) throw DomainError("convergence window must be at least 2");
  if (ratios.size() < static_cast<std::size_t>(window)) return false;
  for (std::size_t i = ratios.size() - static_cast<std::size_t>(window) + 1; i < ratios.size(); ++i) {
    const double scale = std::max(std::fabs(ratios[i]), std::fabs(ratios[i - 1]));
    if (scale == 0.0) continue;
    if (!(std::fabs(ratios[i] - ratios[i - 1]) / scale < tol)) return false;
  }
  return true;
}

KToOneResult k_to_1_from_rows(const std::vector<ScalingRow>& rows, double k, double radius, double growth_slack) {
  KToOneResult res;
  res.k = k;
  res.radius = radius;
  res.growth_slack = growth_slack;
  if (rows.size() < 2) throw DomainError("check_k_to_1: need at least two sets to judge a trend");
  for (const auto& row : rows) {
    const double dev = std::fabs(static_cast<double>(row.preimage_size) - k * static_cast<double>(row.set_size));
    const double c = row.boundary_size ? dev / static_cast<double>(row.boundary_size) : (dev == 0.0 ? 0.0 : INFINITY);
    res.residuals.push_back(c);
    res.max_c = std::max(res.max_c, c);
  }
  const std::size_t half = rows.size() / 2;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i < half)
      res.first_half_max = std::max(res.first_half_max, res.residuals[i]);
    else
      res.second_half_max = std::max(res.second_half_max, res.residuals[i]);
  }
  res.pass = std::isfinite(res.max_c) &&
             res.second_half_max <= res.first_half_max * (1.0 + growth_slack) + growth_slack;
  return res;
}

std::string to_string(NonScalingVerdict v) {
  switch (v) {
    case NonScalingVerdict::NotScaling:
      return "NOT_SCALING";
    case NonScalingVerdict::NoWitness:
      return "NO_WITNESS";
    case NonScalingVerdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

NonScalingResult classify_non_scaling(ScalingReport a, ScalingReport b, double tol) {
  NonScalingResult res;
  res.tol = tol;
  const double lo = std::min(a.limit, b.limit), hi = std::max(a.limit, b.limit);
  res.relative_gap = lo > 0.0 ? hi / lo - 1.0 : INFINITY;
  if (!a.converged || !b.converged)
    res.verdict = NonScalingVerdict::Inconclusive;
  else
    res.verdict = res.relative_gap > tol ? NonScalingVerdict::NotScaling : NonScalingVerdict::NoWitness;
  res.a = std::move(a);
  res.b = std::move(b);
  return res;
}

std::vector<NetBoxSet> box_family(const std::vector<Box>& boxes, const NetOptions& opts) {
  std::vector<NetBoxSet> out;
  out.reserve(boxes.size());
  for (const Box& b : boxes) out.emplace_back(b, opts);
  return out;
}

std::vector<Box> strip_boxes(Interval I, const std::vector<double>& r_js, HeightOrientation orientation) {
  const double l = I.length();
  if (!(l > 0.0)) throw InvalidShapeError("strip: interval must have positive length");
  std::vector<Box> out;
  for (double r : r_js) {
    if (!(r * l > 1.0)) throw InvalidShapeError("strip: need r_j * l > 1");
    const Interval t = orientation == HeightOrientation::GroupLaw ? Interval{-std::log(r), std::log(l)}
                                                                  : Interval{-std::log(l), std::log(r)};
    out.emplace_back(std::vector<Interval>{I, {0.0, r}}, std::vector<Interval>{t});
  }
  return out;
}

}  // namespace solscale
