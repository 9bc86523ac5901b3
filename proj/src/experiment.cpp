#include "solscale/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "solscale/glued.hpp"
#include "solscale/map_format.hpp"
#include "solscale/scaling.hpp"

namespace solscale {

namespace {

using json = nlohmann::json;

// Typed access to one config object. Every value read, default or not, is copied into the
// resolved object, which the summary echoes.
class Cfg {
 public:
  Cfg(const json* in, json* out, std::string path) : in_(in), out_(out), path_(std::move(path)) {
    if (!in_->is_null() && !in_->is_object()) throw ConfigError(path_ + ": expected an object");
    if (!out_->is_object()) *out_ = json::object();
  }

  bool has(const char* key) const { return in_->is_object() && in_->contains(key); }

  template <class T>
  T get(const char* key, T def) {
    T v = has(key) ? convert<T>(key) : def;
    (*out_)[key] = v;
    return v;
  }

  template <class T>
  T require(const char* key) {
    if (!has(key)) throw ConfigError(path_ + "." + key + ": required");
    T v = convert<T>(key);
    (*out_)[key] = v;
    return v;
  }

  Cfg sub(const char* key) {
    static const json kNull;
    const json* child = has(key) ? &(*in_)[key] : &kNull;
    return Cfg(child, &(*out_)[key], path_ + "." + key);
  }

  const std::string& path() const { return path_; }

 private:
  template <class T>
  T convert(const char* key) const {
    try {
      return (*in_)[key].get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  const json* in_;
  json* out_;
  std::string path_;
};

// Keys present in the input but never read.
void reject_unknown(const json& in, const json& out, const std::string& path) {
  if (!in.is_object()) return;
  for (auto it = in.begin(); it != in.end(); ++it) {
    if (!out.is_object() || !out.contains(it.key())) throw ConfigError(path + "." + it.key() + ": unknown key");
    if (it.value().is_object()) reject_unknown(it.value(), out[it.key()], path + "." + it.key());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& p, const std::vector<std::string>& header) : os_(p, std::ios::binary) {
    if (!os_) throw ConfigError("cannot write " + p.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

struct Common {
  std::uint64_t seed = 0;
  bool has_seed = false;
  double radius = 1.0;
  double tol = 1e-2;
  int threads = 1;
};

struct Context {
  std::string sub;
  std::filesystem::path out;
  Common common;
  json results = json::object();
  std::vector<std::filesystem::path> files;

  std::filesystem::path file(const std::string& name) {
    files.push_back(out / name);
    return out / name;
  }
  std::uint64_t seed() const {
    if (!common.has_seed) throw ConfigError(sub + ": a seed is required (config \"seed\" or --seed)");
    return common.seed;
  }
};

GroupSpec read_rank(Cfg& space) {
  const int n = space.get<int>("rank", 1);
  if (n < 1 || n > kMaxRank) throw ConfigError(space.path() + ".rank: must be in [1, " + std::to_string(kMaxRank) + "]");
  return GroupSpec(n);
}

NetOptions read_net_options(Cfg& space) {
  NetOptions o;
  o.budget = space.get<std::uint64_t>("budget", o.budget);
  o.snap_tol = space.get<double>("snap_tol", o.snap_tol);
  return o;
}

GluedSpaceSpec read_glued(Cfg& space, GroupSpec spec) {
  GluedSpaceSpec g;
  g.base = spec;
  g.gammas = space.get<std::vector<double>>("gammas", g.gammas);
  g.index_range = space.get<int>("index_range", 0);
  g.flat_dims = space.get<std::vector<int>>("flat_dims", {});
  return g;
}

HeightOrientation read_orientation(Cfg& c) {
  const auto s = c.get<std::string>("orientation", "quoted");
  if (s == "quoted") return HeightOrientation::Quoted;
  if (s == "group_law") return HeightOrientation::GroupLaw;
  throw ConfigError(c.path() + ".orientation: expected quoted or group_law");
}

// Family descriptions:
//   doubling: side a_j = 2^j * aspect_i for j in [j_from, j_to], truncated heights, x offset
//   strips:   I x [0, 2^j) for j in [j_from, j_to]
//   boxes:    explicit list of {"x": [[lo, hi], ...], "t": [[lo, hi], ...]}
std::vector<Box> read_family(Cfg c, GroupSpec spec) {
  const auto kind = c.get<std::string>("kind", "doubling");
  std::vector<Box> out;
  if (kind == "doubling") {
    const int j0 = c.get<int>("j_from", 3), j1 = c.get<int>("j_to", 8);
    const auto aspect = c.get<std::vector<double>>("aspect", std::vector<double>(static_cast<std::size_t>(spec.x_dim()), 1.0));
    if (aspect.size() != static_cast<std::size_t>(spec.x_dim())) throw ConfigError(c.path() + ".aspect: need 2n entries");
    FolnerBoxOptions o;
    o.height_fraction = c.get<double>("height_fraction", 1.0);
    o.orientation = read_orientation(c);
    o.x_offset = c.get<std::vector<double>>("offset", std::vector<double>(static_cast<std::size_t>(spec.x_dim()), 0.0));
    if (j1 < j0) throw ConfigError(c.path() + ": j_to < j_from");
    for (int j = j0; j <= j1; ++j) {
      std::vector<double> shape;
      for (double s : aspect) shape.push_back(s * std::ldexp(1.0, j));
      out.push_back(folner_box(shape, o));
    }
  } else if (kind == "strips") {
    if (spec.rank() != 1) throw ConfigError(c.path() + ": strips are defined for rank 1");
    const auto I = c.get<std::vector<double>>("interval", {-8.0, 0.0});
    if (I.size() != 2) throw ConfigError(c.path() + ".interval: need [lo, hi]");
    const int j0 = c.get<int>("j_from", 2), j1 = c.get<int>("j_to", 9);
    std::vector<double> rj;
    for (int j = j0; j <= j1; ++j) rj.push_back(std::ldexp(1.0, j));
    out = strip_boxes({I[0], I[1]}, rj, read_orientation(c));
  } else if (kind == "boxes") {
    const auto list = c.require<std::vector<std::map<std::string, std::vector<std::vector<double>>>>>("boxes");
    for (const auto& b : list) {
      std::vector<Interval> x, t;
      auto take = [&](const char* key, std::vector<Interval>& dst) {
        auto it = b.find(key);
        if (it == b.end()) throw ConfigError(c.path() + ".boxes: missing " + key);
        for (const auto& iv : it->second) {
          if (iv.size() != 2) throw ConfigError(c.path() + ".boxes: intervals are [lo, hi]");
          dst.push_back({iv[0], iv[1]});
        }
      };
      take("x", x);
      take("t", t);
      out.emplace_back(std::move(x), std::move(t));
      if (out.back().spec() != spec) throw ConfigError(c.path() + ".boxes: rank mismatch");
    }
  } else {
    throw ConfigError(c.path() + ".kind: expected doubling, strips or boxes");
  }
  if (out.empty()) throw ConfigError(c.path() + ": empty family");
  return out;
}

QiMap read_map(Cfg c, GroupSpec spec) {
  const auto lines = c.get<std::vector<std::string>>("stages", {"round"});
  try {
    return parse_map(spec, lines);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(c.path() + ".stages: " + e.what());
  }
}

json report_json(const ScalingReport& r) {
  json j;
  j["limit"] = r.limit;
  j["converged"] = r.converged;
  j["max_residual"] = r.max_residual;
  j["warnings"] = r.warnings;
  return j;
}

void write_rows(const std::filesystem::path& p, const std::vector<ScalingRow>& rows) {
  CsvWriter w(p, {"set_index", "set_size", "preimage_size", "boundary_size", "ratio", "residual"});
  for (const auto& r : rows)
    w.row({std::to_string(r.set_index), std::to_string(r.set_size), std::to_string(r.preimage_size),
           std::to_string(r.boundary_size), fmt(r.ratio), fmt(r.residual)});
}

// ---------------------------------------------------------------------------

int run_net_check(Cfg& cfg, Context& ctx) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const NetOptions nopts = read_net_options(space);
  Cfg chk = cfg.sub("net_check");
  const int samples = chk.get<int>("round_trip_samples", 100000);
  const int k_max = chk.get<int>("k_max", 20);
  const std::int64_t m_max = chk.get<std::int64_t>("m_max", 1000000);
  const int centres = chk.get<int>("ball_centres", 100);
  const int boxes = chk.get<int>("boxes", 200);
  const double side_min = chk.get<double>("side_min", 1.0), side_max = chk.get<double>("side_max", 50.0);
  const double hlen_min = chk.get<double>("height_length_min", 1.0), hlen_max = chk.get<double>("height_length_max", 6.0);
  const double db = special_box_diameter(spec);
  const double shell_r = chk.get<double>("shell_radius", db);

  std::mt19937_64 rng(ctx.seed());
  NetSpace space_n(spec, 12.0, nopts.budget, nopts.snap_tol);
  CsvWriter w(ctx.file("net_check.csv"), {"check", "trials", "failures", "value"});

  // Round trip.
  std::uniform_int_distribution<std::int64_t> kd(-k_max, k_max), md(-m_max, m_max);
  std::uint64_t rt_fail = 0;
  for (int i = 0; i < samples; ++i) {
    KVec k(spec.t_dim(), 0);
    MVec m(spec.x_dim(), 0);
    for (int j = 0; j < spec.t_dim(); ++j) k[j] = kd(rng);
    for (int j = 0; j < spec.x_dim(); ++j) m[j] = md(rng);
    const NetIndex idx(k, m);
    rt_fail += !(round_to_net(net_point(idx), nopts.snap_tol) == idx);
  }
  w.row({"round_trip", std::to_string(samples), std::to_string(rt_fail), "0"});

  // Separation and bounded geometry on balls around sampled centres.
  std::uniform_int_distribution<std::int64_t> kc(-8, 8), mc(-50, 50);
  double min_sep = INFINITY;
  std::uint64_t max_ball = 0, max_ball_zero = 0;
  const double r = ctx.common.radius;
  for (int i = 0; i < centres; ++i) {
    KVec k(spec.t_dim(), 0);
    MVec m(spec.x_dim(), 0);
    for (int j = 0; j < spec.t_dim(); ++j) k[j] = kc(rng);
    for (int j = 0; j < spec.x_dim(); ++j) m[j] = mc(rng);
    const NetIndex c(k, m);
    space_n.for_each_in_ball(c, 2.0, [&](const NetIndex& q) {
      if (!(q == c)) min_sep = std::min(min_sep, space_n.distance(c, q));
    });
    max_ball = std::max(max_ball, ball_size(space_n, c, r));
    max_ball_zero = std::max(max_ball_zero, ball_size(space_n, NetIndex(KVec(spec.t_dim(), 0), m), r));
  }
  const double delta0 = net_separation_constant();
  const bool sep_ok = min_sep >= delta0 - 1e-12;
  const bool bg_ok = max_ball == max_ball_zero;
  w.row({"separation", std::to_string(centres), sep_ok ? "0" : "1", fmt(min_sep)});
  w.row({"bounded_geometry", std::to_string(centres), bg_ok ? "0" : "1", std::to_string(max_ball)});

  // |mu(S) - |S cap N|| against the G-shell of radius D_B.
  std::uniform_real_distribution<double> side(side_min, side_max), off(-20.0, 20.0), hl(hlen_min, hlen_max),
      hc(-1.0, 1.0);
  std::uint64_t cm_fail = 0;
  double worst = 0.0;
  for (int i = 0; i < boxes; ++i) {
    std::vector<Interval> x, t;
    for (int j = 0; j < spec.x_dim(); ++j) {
      const double lo = off(rng);
      x.push_back({lo, lo + side(rng)});
    }
    for (int j = 0; j < spec.t_dim(); ++j) {
      const double len = hl(rng), mid = hc(rng);
      t.push_back({mid - len / 2, mid + len / 2});
    }
    const Box box(x, t);
    const double gap = std::fabs(static_cast<double>(count_net(box, nopts)) - haar_measure(box));
    const double shell = g_shell_measure(box, shell_r).shell();
    worst = std::max(worst, shell > 0 ? gap / shell : (gap > 0 ? INFINITY : 0.0));
    cm_fail += gap > shell + 1e-9;
  }
  w.row({"count_vs_measure", std::to_string(boxes), std::to_string(cm_fail), fmt(worst)});

  auto& R = ctx.results;
  R["round_trip_failures"] = rt_fail;
  R["min_separation"] = min_sep;
  R["separation_constant"] = delta0;
  R["max_ball_size"] = max_ball;
  R["max_ball_size_height_zero"] = max_ball_zero;
  R["count_vs_measure_failures"] = cm_fail;
  R["count_vs_measure_worst_fraction"] = worst;
  R["special_box_diameter"] = db;
  return rt_fail == 0 && sep_ok && bg_ok && cm_fail == 0 ? kExitPass : kExitFail;
}

int run_folner(Cfg& cfg, Context& ctx) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const NetOptions nopts = read_net_options(space);
  const auto boxes = read_family(cfg.sub("family"), spec);
  const NetSpace net(spec, 12.0, nopts.budget, nopts.snap_tol);
  const auto prof = profile_family(net, box_family(boxes, nopts), ctx.common.radius, ctx.common.threads);
  const auto ratios = prof.folner_ratios();
  CsvWriter w(ctx.file("folner.csv"), {"set_index", "set_size", "boundary_size", "ratio"});
  for (std::size_t i = 0; i < ratios.size(); ++i)
    w.row({std::to_string(i), std::to_string(prof.sizes[i]), std::to_string(prof.boundary_sizes[i]), fmt(ratios[i])});
  ctx.results["decaying"] = prof.decaying();
  ctx.results["last_ratio"] = ratios.back();
  return prof.decaying() ? kExitPass : kExitFail;
}

int run_growth(Cfg& cfg, Context& ctx) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const NetOptions nopts = read_net_options(space);
  Cfg g = cfg.sub("growth");
  const int r_max = g.get<int>("r_max", 6);
  const int fit_from = g.get<int>("fit_from", r_max / 2), fit_to = g.get<int>("fit_to", r_max);
  const auto where = g.get<std::string>("space", "net");
  if (r_max < 1 || fit_from < 0 || fit_to > r_max || fit_to <= fit_from) throw ConfigError("growth: bad radius range");
  std::vector<std::uint64_t> counts;
  if (where == "net") {
    const NetSpace net(spec, std::max(12.0, static_cast<double>(r_max)), nopts.budget, nopts.snap_tol);
    counts = growth(net, NetIndex(KVec(spec.t_dim(), 0), MVec(spec.x_dim(), 0)), r_max);
  } else if (where == "flat") {
    const GluedSpace gs(read_glued(space, spec), std::max(12.0, static_cast<double>(r_max)), nopts.budget, nopts.snap_tol);
    const int locus = g.get<int>("locus", 1);
    const auto j = g.get<std::int64_t>("j", 0);
    const auto off = g.get<std::int64_t>("offset", 100);
    FlatVec v(gs.flat_dim(locus), 0);
    v[0] = off;
    counts = growth(gs, gs.flat_point(locus, j, v), r_max);
    ctx.results["flat_dim"] = gs.flat_dim(locus);
  } else {
    throw ConfigError("growth.space: expected net or flat");
  }
  CsvWriter w(ctx.file("growth.csv"), {"radius", "ball_size"});
  for (std::size_t r = 0; r < counts.size(); ++r) w.row({std::to_string(r), std::to_string(counts[r])});
  ctx.results["log_growth_rate"] = log_growth_rate(counts, fit_from, fit_to);
  ctx.results["polynomial_degree"] = polynomial_growth_degree(counts, fit_from, fit_to);
  return kExitPass;
}

int run_scaling(Cfg& cfg, Context& ctx, const std::string& forced_mode) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const NetOptions nopts = read_net_options(space);
  Cfg sc = cfg.sub("scaling");
  const auto mode = forced_mode.empty() ? sc.get<std::string>("mode", "estimate") : sc.get<std::string>("mode", forced_mode);
  if (!forced_mode.empty() && mode != forced_mode) throw ConfigError("scaling.mode conflicts with the subcommand");
  ScalingOptions opts;
  opts.radius = ctx.common.radius;
  opts.convergence_tol = ctx.common.tol;
  opts.threads = ctx.common.threads;
  opts.window = sc.get<int>("window", 3);
  opts.net = nopts;
  const auto where = sc.get<std::string>("space", "net");

  auto& R = ctx.results;
  R["mode"] = mode;
  if (where == "glued") {
    const GluedSpace gs(read_glued(space, spec), 12.0, nopts.budget, nopts.snap_tol);
    const GluedScalingMap gm(gs, sc.get<int>("locus", 1));
    std::vector<GluedBoxSet> fam;
    for (const Box& b : read_family(cfg.sub("family"), spec)) fam.emplace_back(NetBoxSet(b, nopts));
    if (mode != "estimate") throw ConfigError("scaling: the glued map supports mode estimate");
    const auto rep = estimate_scaling(gs, gm, fam, opts);
    write_rows(ctx.file("scaling.csv"), rep.rows);
    R["report"] = report_json(rep);
    R["k"] = rep.limit;
    return rep.converged ? kExitPass : kExitInconclusive;
  }
  if (where != "net") throw ConfigError("scaling.space: expected net or glued");
  const NetSpace net(spec, 12.0, nopts.budget, nopts.snap_tol);
  const QiMap map = read_map(cfg.sub("map"), spec);
  R["map"] = format_map(map);
  const auto fam = box_family(read_family(cfg.sub("family"), spec), nopts);
  if (mode == "estimate") {
    const auto rep = estimate_scaling(net, map, fam, opts);
    write_rows(ctx.file("scaling.csv"), rep.rows);
    R["report"] = report_json(rep);
    R["k"] = rep.limit;
    return rep.converged ? kExitPass : kExitInconclusive;
  }
  if (mode == "check") {
    const double k = sc.require<double>("k");
    const double slack = sc.get<double>("growth_slack", 0.25);
    const auto rep = estimate_scaling(net, map, fam, opts);
    const auto res = k_to_1_from_rows(rep.rows, k, opts.radius, slack);
    write_rows(ctx.file("scaling.csv"), rep.rows);
    R["k"] = k;
    R["residual_constants"] = res.residuals;
    R["max_c"] = res.max_c;
    R["first_half_max"] = res.first_half_max;
    R["second_half_max"] = res.second_half_max;
    R["pass"] = res.pass;
    return res.pass ? kExitPass : kExitFail;
  }
  if (mode == "non-scaling") {
    const double gap_tol = sc.get<double>("gap_tol", 0.1);
    const auto fam_b = box_family(read_family(cfg.sub("family_b"), spec), nopts);
    const auto res = non_scaling_test(net, map, fam, fam_b, opts, gap_tol);
    write_rows(ctx.file("scaling_a.csv"), res.a.rows);
    write_rows(ctx.file("scaling_b.csv"), res.b.rows);
    R["a"] = report_json(res.a);
    R["b"] = report_json(res.b);
    R["relative_gap"] = res.relative_gap;
    R["verdict"] = to_string(res.verdict);
    switch (res.verdict) {
      case NonScalingVerdict::NotScaling:
        return kExitPass;
      case NonScalingVerdict::NoWitness:
        return kExitFail;
      case NonScalingVerdict::Inconclusive:
        return kExitInconclusive;
    }
  }
  throw ConfigError("scaling.mode: expected estimate, check or non-scaling");
}

int run_glued_check(Cfg& cfg, Context& ctx) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const NetOptions nopts = read_net_options(space);
  const GluedSpace gs(read_glued(space, spec), 12.0, nopts.budget, nopts.snap_tol);
  Cfg chk = cfg.sub("glued_check");
  const int centres = chk.get<int>("centres", 200);
  const int sets = chk.get<int>("sets", 100);
  const double lemma_r = chk.get<double>("lemma_radius", 1.0 + 2.0 * special_box_diameter(spec));
  std::mt19937_64 rng(ctx.seed());
  CsvWriter w(ctx.file("glued_check.csv"), {"check", "trials", "failures", "value"});

  // Separation: nearest neighbour of sampled net, attachment and flat points.
  const double delta0 = net_separation_constant();
  double min_sep = INFINITY;
  const std::int64_t J = gs.index_range();
  const std::int64_t jcap = std::min<std::int64_t>(J, 12);
  std::uniform_int_distribution<std::int64_t> jd(-jcap, jcap), vd(-3, 3), kd(-3, 3), md(-40, 40);
  std::uniform_int_distribution<int> locd(1, gs.loci()), kind(0, 2);
  for (int i = 0; i < centres; ++i) {
    GluedPoint c;
    const int locus = locd(rng);
    switch (kind(rng)) {
      case 0: {
        KVec k(spec.t_dim(), 0);
        MVec m(spec.x_dim(), 0);
        for (int j = 0; j < spec.t_dim(); ++j) k[j] = kd(rng);
        for (int j = 0; j < spec.x_dim(); ++j) m[j] = md(rng);
        c = GluedPoint::on_net(NetIndex(k, m));
        break;
      }
      case 1:
        c = GluedPoint::on_net(gs.attachment_point(locus, jd(rng)));
        break;
      default: {
        FlatVec v(gs.flat_dim(locus), 0);
        for (int a = 0; a < v.size(); ++a) v[a] = vd(rng);
        c = gs.flat_point(locus, jd(rng), v);
      }
    }
    gs.for_each_in_ball(c, 2.0, [&](const GluedPoint& q) {
      if (!(q == c)) min_sep = std::min(min_sep, gs.distance(c, q));
    });
  }
  const bool sep_ok = min_sep >= delta0 - 1e-12;
  w.row({"separation", std::to_string(centres), sep_ok ? "0" : "1", fmt(min_sep)});

  // Attachment multiplicity against ceil(log_gamma 2) + 1.
  std::uint64_t mult_fail = 0;
  json mult = json::array();
  for (int locus = 1; locus <= gs.loci(); ++locus) {
    int worst = 0;
    for (std::int64_t j = -J; j <= J; ++j) worst = std::max(worst, gs.attachment_multiplicity(gs.attachment_point(locus, j)));
    const int bound = multiplicity_bound(gs.gamma(locus));
    mult_fail += worst > bound;
    mult.push_back({{"locus", locus}, {"gamma", gs.gamma(locus)}, {"max_multiplicity", worst}, {"bound", bound}});
    w.row({"multiplicity_locus_" + std::to_string(locus), std::to_string(2 * J + 1), worst > bound ? "1" : "0",
           std::to_string(worst)});
  }

  // |S cap A| <= |boundary_r S| on random box-restricted sets.
  std::uniform_real_distribution<double> lo(-40.0, 30.0), len(1.0, 70.0), tl(-3.0, 0.0), tlen(0.5, 4.0);
  std::uint64_t lemma_fail = 0, tried = 0;
  double worst_frac = 0.0;
  const NetSpace& net = gs.net_space();
  for (int i = 0; i < sets; ++i) {
    std::vector<Interval> x, t;
    for (int j = 0; j < spec.x_dim(); ++j) {
      const double a = lo(rng);
      x.push_back({a, a + len(rng)});
    }
    for (int j = 0; j < spec.t_dim(); ++j) {
      const double a = tl(rng);
      t.push_back({a, a + tlen(rng)});
    }
    const NetBoxSet S(Box(x, t), nopts);
    if (S.empty()) continue;
    ++tried;
    std::uint64_t in_a = 0;
    S.for_each([&](const NetIndex& p) { in_a += gs.attachment_multiplicity(p) > 0; });
    const std::uint64_t bd = boundary_size(net, S, lemma_r);
    lemma_fail += in_a > bd;
    if (bd) worst_frac = std::max(worst_frac, static_cast<double>(in_a) / static_cast<double>(bd));
  }
  w.row({"attachments_vs_boundary", std::to_string(tried), std::to_string(lemma_fail), fmt(worst_frac)});

  auto& R = ctx.results;
  R["min_separation"] = min_sep;
  R["separation_constant"] = delta0;
  R["multiplicity"] = mult;
  R["lemma_radius"] = lemma_r;
  R["lemma_sets"] = tried;
  R["lemma_failures"] = lemma_fail;
  R["lemma_worst_fraction"] = worst_frac;
  return sep_ok && mult_fail == 0 && lemma_fail == 0 ? kExitPass : kExitFail;
}

int run_drift(Cfg& cfg, Context& ctx) {
  Cfg space = cfg.sub("space");
  const GroupSpec spec = read_rank(space);
  const GluedSpace gs(read_glued(space, spec));
  Cfg d = cfg.sub("drift");
  const int locus = d.get<int>("locus", 1);
  const double gamma = gs.gamma(locus);
  const double m = d.get<double>("m", gamma * gamma);
  const int J = d.get<int>("J", std::min(30, gs.index_range() - 1));
  const double bound = d.get<double>("bound", net_separation_constant());
  const auto curve = attachment_drift(gs, m, locus, J);
  CsvWriter w(ctx.file("drift.csv"), {"j", "drift"});
  double mx = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    w.row({std::to_string(i + 1), fmt(curve[i])});
    mx = std::max(mx, curve[i]);
  }
  ctx.results["max_drift"] = mx;
  ctx.results["bounded"] = mx <= bound;
  return mx <= bound ? kExitPass : kExitFail;
}

std::string status_of(int code) {
  switch (code) {
    case kExitPass:
      return "PASS";
    case kExitFail:
      return "FAIL";
    default:
      return "INCONCLUSIVE";
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> subs{"net-check", "folner",      "growth", "scaling",
                                             "non-scaling", "glued-check", "drift"};
  return subs;
}

RunOutcome run_experiment(const std::string& subcommand, const std::string& config_json,
                          const std::filesystem::path& out_dir, const CliOverrides& overrides) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
    throw ConfigError("unknown subcommand: " + subcommand);
  json in;
  try {
    in = config_json.empty() ? json::object() : json::parse(config_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!in.is_object()) throw ConfigError("config must be a JSON object");

  json resolved = json::object();
  Cfg cfg(&in, &resolved, "config");
  Context ctx;
  ctx.sub = subcommand;
  ctx.out = out_dir;
  Common& c = ctx.common;
  c.has_seed = overrides.seed.has_value() || cfg.has("seed");
  c.seed = overrides.seed ? *overrides.seed : cfg.get<std::uint64_t>("seed", 0);
  if (!c.has_seed) resolved.erase("seed");
  c.radius = overrides.radius ? *overrides.radius : cfg.get<double>("radius", 1.0);
  c.tol = overrides.tol ? *overrides.tol : cfg.get<double>("tol", 1e-2);
  c.threads = overrides.threads ? *overrides.threads : cfg.get<int>("threads", 1);
  resolved["seed"] = c.has_seed ? json(c.seed) : json(nullptr);
  resolved["radius"] = c.radius;
  resolved["tol"] = c.tol;
  resolved["threads"] = c.threads;
  if (!(c.radius >= 0.0) || !(c.tol > 0.0) || c.threads < 1) throw ConfigError("radius, tol or threads out of range");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());

  int code;
  try {
    if (subcommand == "net-check")
      code = run_net_check(cfg, ctx);
    else if (subcommand == "folner")
      code = run_folner(cfg, ctx);
    else if (subcommand == "growth")
      code = run_growth(cfg, ctx);
    else if (subcommand == "scaling")
      code = run_scaling(cfg, ctx, "");
    else if (subcommand == "non-scaling")
      code = run_scaling(cfg, ctx, "non-scaling");
    else if (subcommand == "glued-check")
      code = run_glued_check(cfg, ctx);
    else
      code = run_drift(cfg, ctx);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidShapeError& e) {
    throw ConfigError(e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  // Overridden keys were never read from the config; they are still valid input.
  for (const char* key : {"seed", "radius", "tol", "threads"})
    if (in.contains(key)) resolved[key] = resolved[key];
  reject_unknown(in, resolved, "config");

  RunOutcome outcome;
  outcome.exit_code = code;
  outcome.status = ctx.results.contains("verdict") ? ctx.results["verdict"].get<std::string>() : status_of(code);
  json summary;
  summary["subcommand"] = subcommand;
  summary["status"] = outcome.status;
  summary["exit_code"] = code;
  summary["config"] = resolved;
  summary["results"] = ctx.results;
  std::vector<std::string> names;
  for (const auto& f : ctx.files) names.push_back(f.filename().string());
  summary["files"] = names;
  {
    std::ofstream os(out_dir / "summary.json", std::ios::binary);
    if (!os) throw ConfigError("cannot write summary.json");
    os << summary.dump(2) << '\n';
  }
  outcome.files = ctx.files;
  outcome.files.push_back(out_dir / "summary.json");
  return outcome;
}

}  // namespace solscale
