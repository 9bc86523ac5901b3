#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "solscale/glued.hpp"

namespace solscale {

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct ScalingRow {
  std::size_t set_index = 0;
  std::uint64_t set_size = 0;
  std::uint64_t preimage_size = 0;
  std::uint64_t boundary_size = 0;
  double ratio = 0.0;
  double residual = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double limit = 0.0;         // last ratio
  double max_residual = 0.0;  // residuals against `limit`
  bool converged = false;
  double radius = 1.0;
  double convergence_tol = 1e-2;
  std::vector<std::string> warnings;
};

struct ScalingOptions {
  double radius = 1.0;
  double convergence_tol = 1e-2;
  int window = 3;  // trailing sets whose successive ratios must agree
  int threads = 1;
  NetOptions net;
};

// Per-set sizes and r-boundary sizes; independent of the map, so reusable across maps.
struct FamilyProfile {
  double radius = 1.0;
  std::vector<std::uint64_t> sizes;
  std::vector<std::uint64_t> boundary_sizes;
  std::vector<double> folner_ratios() const;
  bool decaying() const;
};

template <class Space, class Set>
FamilyProfile profile_family(const Space& space, const std::vector<Set>& family, double r, int threads = 1) {
  FamilyProfile prof;
  prof.radius = r;
  prof.sizes.resize(family.size());
  prof.boundary_sizes.resize(family.size());
  parallel_for(family.size(), threads, [&](std::size_t i) {
    if (family[i].size() == 0) throw DomainError("family member " + std::to_string(i) + " is empty");
    prof.sizes[i] = family[i].size();
    prof.boundary_sizes[i] = boundary_size(space, family[i], r);
  });
  return prof;
}

bool ratios_converged(const std::vector<double>& ratios, int window, double tol);

template <class Space, class Map, class Set>
ScalingReport estimate_scaling(const Space& space, const Map& map, const std::vector<Set>& family,
                               const ScalingOptions& opts, const FamilyProfile* profile = nullptr) {
  if (family.empty()) throw DomainError("estimate_scaling: empty family");
  FamilyProfile local;
  if (!profile) {
    local = profile_family(space, family, opts.radius, opts.threads);
    profile = &local;
  }
  if (profile->sizes.size() != family.size() || profile->radius != opts.radius)
    throw DomainError("estimate_scaling: profile does not match the family");

  ScalingReport rep;
  rep.radius = opts.radius;
  rep.convergence_tol = opts.convergence_tol;
  rep.rows.resize(family.size());
  parallel_for(family.size(), opts.threads, [&](std::size_t i) {
    ScalingRow& row = rep.rows[i];
    row.set_index = i;
    row.set_size = profile->sizes[i];
    row.boundary_size = profile->boundary_sizes[i];
    row.preimage_size = preimage_count(map, family[i], opts.net);
    row.ratio = static_cast<double>(row.preimage_size) / static_cast<double>(row.set_size);
  });
  std::vector<double> ratios;
  for (const auto& row : rep.rows) ratios.push_back(row.ratio);
  rep.limit = ratios.back();
  rep.converged = ratios_converged(ratios, opts.window, opts.convergence_tol);
  for (auto& row : rep.rows) {
    const double dev = std::fabs(static_cast<double>(row.preimage_size) - rep.limit * static_cast<double>(row.set_size));
    row.residual = row.boundary_size ? dev / static_cast<double>(row.boundary_size) : (dev == 0.0 ? 0.0 : INFINITY);
    rep.max_residual = std::max(rep.max_residual, row.residual);
  }
  if (!profile->decaying())
    rep.warnings.push_back("family is not Folner-decaying at r = " + std::to_string(opts.radius));
  if (!rep.converged) rep.warnings.push_back("ratios did not converge within tolerance");
  return rep;
}

struct KToOneResult {
  double k = 1.0;
  double radius = 1.0;
  std::vector<double> residuals;  // ||q^-1(S)| - k|S|| / |boundary_r S|
  double max_c = 0.0;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  double growth_slack = 0.25;
  bool pass = false;
};

// Residual constants against a fixed k. Passes when the residual constant shows no growth:
// the later half's maximum is at most (1 + slack) * (earlier half's maximum) + slack. The
// additive term keeps exact early sets (C = 0) from turning rounding noise into a trend.
KToOneResult k_to_1_from_rows(const std::vector<ScalingRow>& rows, double k, double radius, double growth_slack);

template <class Space, class Map, class Set>
KToOneResult check_k_to_1(const Space& space, const Map& map, double k, const std::vector<Set>& sets, double r,
                          double growth_slack = 0.25, int threads = 1, const FamilyProfile* profile = nullptr) {
  if (!(k > 0.0)) throw DomainError("check_k_to_1: k must be positive");
  ScalingOptions opts;
  opts.radius = r;
  opts.threads = threads;
  const ScalingReport rep = estimate_scaling(space, map, sets, opts, profile);
  return k_to_1_from_rows(rep.rows, k, r, growth_slack);
}

enum class NonScalingVerdict { NotScaling, NoWitness, Inconclusive };
std::string to_string(NonScalingVerdict v);

struct NonScalingResult {
  ScalingReport a;
  ScalingReport b;
  double relative_gap = 0.0;  // max(la, lb) / min(la, lb) - 1
  double tol = 0.1;
  NonScalingVerdict verdict = NonScalingVerdict::Inconclusive;
};

NonScalingResult classify_non_scaling(ScalingReport a, ScalingReport b, double tol);

template <class Space, class Map, class Set>
NonScalingResult non_scaling_test(const Space& space, const Map& map, const std::vector<Set>& family_a,
                                  const std::vector<Set>& family_b, const ScalingOptions& opts, double tol = 0.1) {
  return classify_non_scaling(estimate_scaling(space, map, family_a, opts),
                              estimate_scaling(space, map, family_b, opts), tol);
}

// Box families.
std::vector<NetBoxSet> box_family(const std::vector<Box>& boxes, const NetOptions& opts = {});

// Sol strips I x [0, r_j) with heights [-log r_j, log l) (group-law orientation) or
// [-log l, log r_j) (quoted orientation), l = |I|.
std::vector<Box> strip_boxes(Interval I, const std::vector<double>& r_js,
                             HeightOrientation orientation = HeightOrientation::GroupLaw);

}  // namespace solscale
