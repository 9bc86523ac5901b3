#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "solscale/glued.hpp"

using namespace solscale;

namespace {

GluedSpace sol_glued(double gamma, int J = 0) {
  GluedSpaceSpec s;
  s.gammas = {gamma};
  s.index_range = J;
  return GluedSpace(s);
}

FlatVec fv(std::initializer_list<std::int64_t> v) { return FlatVec(std::span<const std::int64_t>(v.begin(), v.size())); }

std::int64_t l1(const FlatVec& a, const FlatVec& b) {
  std::int64_t s = 0;
  for (int i = 0; i < a.size(); ++i) s += std::llabs(a[i] - b[i]);
  return s;
}

// Glued metric spelled out from the definition, with the net part from the oracle.
double oracle_distance(const GluedSpace& sp, const GluedPoint& p, const GluedPoint& q) {
  if (p.is_net() && q.is_net()) return oracle::distance(p.net(), q.net());
  if (!p.is_net() && !q.is_net() && p.locus() == q.locus() && p.j() == q.j()) return static_cast<double>(l1(p.v(), q.v()));
  const FlatVec zp(p.is_net() ? 0 : p.v().size(), 0), zq(q.is_net() ? 0 : q.v().size(), 0);
  const double dp = p.is_net() ? 0.0 : static_cast<double>(l1(p.v(), zp));
  const double dq = q.is_net() ? 0.0 : static_cast<double>(l1(q.v(), zq));
  const NetIndex ap = p.is_net() ? p.net() : sp.attachment_point(p.locus(), p.j());
  const NetIndex aq = q.is_net() ? q.net() : sp.attachment_point(q.locus(), q.j());
  return dp + oracle::distance(ap, aq) + dq;
}

// Nonzero lattice vectors of dimension d with |v|_1 <= R.
std::vector<FlatVec> lattice_ball(int d, std::int64_t R) {
  std::vector<FlatVec> out;
  FlatVec v(d, -R);
  while (true) {
    const std::int64_t n = l1(v, FlatVec(d, 0));
    if (n > 0 && n <= R) out.push_back(v);
    int a = d - 1;
    while (a >= 0 && ++v[a] > R) v[a--] = -R;
    if (a < 0) break;
  }
  return out;
}

std::vector<GluedPoint> glued_window(const GluedSpace& sp, int K, int M, std::int64_t R, std::int64_t jmax) {
  std::vector<GluedPoint> out;
  oracle::for_window(sp.spec().base.rank(), K, M, [&](const NetIndex& q) { out.push_back(GluedPoint::on_net(q)); });
  for (int i = 1; i <= sp.loci(); ++i)
    for (std::int64_t j = -sp.index_range(); j <= std::min<std::int64_t>(jmax, sp.index_range()); ++j)
      for (const auto& v : lattice_ball(sp.flat_dim(i), R)) out.push_back(GluedPoint::in_flat(i, j, v));
  return out;
}

}  // namespace

TEST(Attachment, GammaTwoExamples) {
  const auto sp = sol_glued(2.0);
  EXPECT_EQ(sp.attachment_point(1, 0), oracle::index({0}, {1, 1}));
  EXPECT_EQ(sp.attachment_point(1, 1), oracle::index({0}, {4, 0}));
  EXPECT_EQ(sp.attachment_point(1, -1), oracle::index({0}, {0, 2}));
  EXPECT_EQ(sp.index_range(), 31);
  EXPECT_THROW(sp.attachment_point(1, 32), RangeError);
  EXPECT_THROW(sp.attachment_point(2, 0), RangeError);
}

TEST(Attachment, IndexRangeLimits) {
  EXPECT_EQ(default_index_range(2.0), 31);
  EXPECT_EQ(default_index_range(3.0), 19);
  EXPECT_EQ(default_index_range(1.3), 40);
  EXPECT_THROW(default_index_range(1.0), DomainError);
  EXPECT_THROW(sol_glued(2.0, 32), RangeError);
  const auto sp = sol_glued(2.0);
  EXPECT_EQ(sp.attachment_point(1, 31), oracle::index({0}, {std::int64_t{1} << 62, 0}));
  // Unit neighbours stay distinct as doubles up to 2^52; balls refuse centres beyond that.
  EXPECT_GT(sp.net_space().distance(sp.attachment_point(1, 26), oracle::index({0}, {(std::int64_t{1} << 52) + 1, 0})), 0.9);
  EXPECT_GE(ball_size(sp, GluedPoint::on_net(sp.attachment_point(1, 26)), 1.0), 11u);
  EXPECT_THROW(ball_size(sp, GluedPoint::on_net(sp.attachment_point(1, 27)), 1.0), RangeError);
}

TEST(Attachment, MultiplicityGammaTwoIsOne) {
  const auto sp = sol_glued(2.0);
  for (std::int64_t j = -sp.index_range(); j <= sp.index_range(); ++j)
    EXPECT_EQ(sp.attachment_multiplicity(sp.attachment_point(1, j)), 1);
  EXPECT_EQ(sp.attachment_multiplicity(oracle::index({0}, {0, 0})), 0);
}

TEST(Attachment, MultiplicityGammaOnePointThree) {
  const auto sp = sol_glued(1.3);
  // The unit corner is never hit: x < 1 forces j < 0 and then y > 1.
  EXPECT_EQ(sp.attachment_multiplicity(oracle::index({0}, {0, 0})), 0);
  // y = 1.3 and 1.69 both floor to 1.
  EXPECT_EQ(sp.attachment_multiplicity(oracle::index({0}, {0, 1})), 2);
  int worst = 0;
  std::uint64_t total = 0;
  NetSet distinct;
  for (std::int64_t j = -sp.index_range(); j <= sp.index_range(); ++j) distinct.insert(sp.attachment_point(1, j));
  for (const auto& a : distinct) {
    worst = std::max(worst, sp.attachment_multiplicity(a));
    total += static_cast<std::uint64_t>(sp.attachment_multiplicity(a));
  }
  EXPECT_EQ(worst, 2);
  EXPECT_EQ(total, sp.attachment_pair_count());
}

TEST(Attachment, MultiplicityWithinBound) {
  for (double g : {1.3, 1.5, 2.0, 3.0}) {
    const auto sp = sol_glued(g);
    int worst = 0;
    for (std::int64_t j = -sp.index_range(); j <= sp.index_range(); ++j)
      worst = std::max(worst, sp.attachment_multiplicity(sp.attachment_point(1, j)));
    EXPECT_LE(worst, multiplicity_bound(g)) << "gamma=" << g;
  }
  EXPECT_EQ(multiplicity_bound(2.0), 2);
  EXPECT_EQ(multiplicity_bound(1.3), 4);
}

TEST(Distance, Examples) {
  const auto sp = sol_glued(2.0);
  const auto p = sp.flat_point(1, 3, fv({3, 4}));
  EXPECT_DOUBLE_EQ(sp.distance(p, GluedPoint::on_net(sp.attachment_point(1, 3))), 7.0);
  EXPECT_DOUBLE_EQ(sp.distance(p, sp.flat_point(1, 3, fv({-1, 6}))), 6.0);
  const auto a = sp.flat_point(1, 2, fv({1, 0})), b = sp.flat_point(1, -1, fv({0, 1}));
  EXPECT_DOUBLE_EQ(glued_distance(sp, a, b),
                   2.0 + oracle::distance(sp.attachment_point(1, 2), sp.attachment_point(1, -1)));
  // The zero vector is the attachment point itself.
  EXPECT_TRUE(sp.flat_point(1, 2, fv({0, 0})).is_net());
  EXPECT_EQ(sp.flat_point(1, 2, fv({0, 0})).net(), sp.attachment_point(1, 2));
}

TEST(Distance, TriangleInequalityOnRandomTriples) {
  const auto sp = sol_glued(2.0);
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> coin(0, 1), jd(-4, 4), vd(-3, 3), kd(-2, 2), md(-20, 20);
  auto draw = [&]() {
    if (coin(rng)) return GluedPoint::on_net(oracle::index({kd(rng)}, {md(rng), md(rng)}));
    return sp.flat_point(1, jd(rng), fv({vd(rng), vd(rng)}));
  };
  for (int trial = 0; trial < 3000; ++trial) {
    const auto p = draw(), q = draw(), r = draw();
    EXPECT_LE(sp.distance(p, r), sp.distance(p, q) + sp.distance(q, r) + 1e-9);
    EXPECT_DOUBLE_EQ(sp.distance(p, q), sp.distance(q, p));
    EXPECT_NEAR(sp.distance(p, q), oracle_distance(sp, p, q), 1e-9);
  }
}

TEST(Ball, MatchesBruteForce) {
  const auto sp = sol_glued(2.0);
  const std::vector<GluedPoint> centres{GluedPoint::on_net(oracle::index({0}, {0, 0})),
                                        GluedPoint::on_net(sp.attachment_point(1, 2)),
                                        sp.flat_point(1, 2, fv({1, 0})), sp.flat_point(1, 0, fv({0, -1}))};
  const double r = 2.0;
  // Anchors sit at m <= 16 near height 0; |k| <= 3 and |m| <= 150 covers their 2-balls.
  const auto cand = glued_window(sp, 3, 150, 3, sp.index_range());
  for (const auto& c : centres) {
    GluedSet brute;
    for (const auto& q : cand)
      if (oracle_distance(sp, c, q) <= r + 1e-9) brute.insert(q);
    EXPECT_EQ(ball(sp, c, r), brute) << to_string(c);
  }
}

TEST(UDBG, SeparationAndBoundedGeometry) {
  const auto sp = sol_glued(2.0);
  const double delta0 = net_separation_constant();
  const auto pts = glued_window(sp, 1, 6, 2, 4);
  double best = INFINITY;
  for (std::size_t a = 0; a < pts.size(); a += 3)
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::min(best, sp.distance(pts[a], pts[b]));
  EXPECT_GE(best, delta0 - 1e-12);

  // A glued r-ball holds the net r-ball around its anchor plus at most M flats of taxicab radius r
  // per net point (M the multiplicity bound), plus the centre's own flat.
  const auto T = [](int d, double r) { return lattice_ball(d, static_cast<std::int64_t>(r)).size() + 1; };
  const int M = multiplicity_bound(2.0);
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> jd(-26, 26), vd(-2, 2);
  for (double r : {1.0, 2.0, 3.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto c = sp.flat_point(1, jd(rng), fv({vd(rng), vd(rng)}));
      const NetIndex anchor = c.is_net() ? c.net() : sp.attachment_point(1, c.j());
      const std::uint64_t bound = ball_size(sp.net_space(), anchor, r) * (1 + M * T(2, r)) + T(2, r);
      EXPECT_LE(ball_size(sp, c, r), bound);
    }
  }
}

TEST(Attachments, InSetBoundedByBoundary) {
  // Each attachment point in S forces a boundary point within 1 + 2 D_B.
  const auto sp = sol_glued(2.0);
  const NetSpace& net = sp.net_space();
  const double r = 1.0 + 2.0 * special_box_diameter(GroupSpec(1));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lo(-40.0, 30.0), len(1.0, 70.0), tl(-3.0, 0.0), tlen(0.5, 4.0);
  std::uniform_int_distribution<int> kd(-2, 2), md(-70, 70);
  for (int trial = 0; trial < 30; ++trial) {
    std::uint64_t in_a = 0, bd = 0;
    if (trial % 5 != 0) {
      const double x0 = lo(rng), y0 = lo(rng), t0 = tl(rng);
      const NetBoxSet S(Box({{x0, x0 + len(rng)}, {y0, y0 + len(rng)}}, {{t0, t0 + tlen(rng)}}));
      if (S.empty()) continue;
      S.for_each([&](const NetIndex& p) { in_a += sp.attachment_multiplicity(p) > 0; });
      bd = boundary_size(net, S, r);
    } else {
      NetSet S;
      for (int i = 0; i < 100; ++i) S.insert(oracle::index({kd(rng)}, {md(rng), md(rng)}));
      for (std::int64_t j = -5; j <= 5; ++j) S.insert(sp.attachment_point(1, j));
      for (const auto& p : S) in_a += sp.attachment_multiplicity(p) > 0;
      bd = boundary_size(net, S, r);
    }
    EXPECT_LE(in_a, bd) << "trial " << trial;
  }
}

TEST(Growth, FlatDimensionsSeparate) {
  GluedSpaceSpec s;
  s.base = GroupSpec(2);
  s.gammas = {2.0, 3.0};
  const GluedSpace sp(s);
  EXPECT_EQ(sp.flat_dim(1), 4);
  EXPECT_EQ(sp.flat_dim(2), 5);
  // Centres far from the attachment point so the balls stay inside one flat.
  FlatVec c1(4, 0), c2(5, 0);
  c1[0] = 100;
  c2[0] = 100;
  const auto g1 = growth(sp, sp.flat_point(1, 0, c1), 12);
  const auto g2 = growth(sp, sp.flat_point(2, 0, c2), 12);
  const double d1 = polynomial_growth_degree(g1, 6, 12), d2 = polynomial_growth_degree(g2, 6, 12);
  EXPECT_GT(d2, d1 + 0.5);
  EXPECT_LE(d1, 4.0);
  EXPECT_LE(d2, 5.0);
  for (std::size_t r = 6; r < g1.size(); ++r) EXPECT_GT(g2[r], g1[r]);
}

TEST(ScalingMap, AttachmentShiftsToNext) {
  const auto sp = sol_glued(2.0);
  const GluedScalingMap q(sp, 1);
  EXPECT_DOUBLE_EQ(nominal_scaling(q.net_map()), 0.5);
  // Measured: exact for j >= 0, one horizontal step (distance arccosh 3/2) at j = -1.
  double worst = 0.0;
  for (std::int64_t j = -sp.index_range(); j < sp.index_range(); ++j) {
    const auto img = q.apply(GluedPoint::on_net(sp.attachment_point(1, j)));
    ASSERT_TRUE(img.is_net());
    worst = std::max(worst, oracle::distance(img.net(), sp.attachment_point(1, j + 1)));
  }
  EXPECT_NEAR(worst, net_separation_constant(), 1e-12);
}

TEST(ScalingMap, FlatAction) {
  const auto sp = sol_glued(2.0);
  const GluedScalingMap q(sp, 1);
  const auto p = q.apply(sp.flat_point(1, 3, fv({5, -2})));
  ASSERT_FALSE(p.is_net());
  EXPECT_EQ(p.j(), 4);
  EXPECT_EQ(p.v(), fv({2, -2}));
  const auto m = q.apply(sp.flat_point(1, 3, fv({-3, 0})));
  EXPECT_EQ(m.v(), fv({-2, 0}));
  // (1, 0) lands on the zero vector, i.e. the next attachment point.
  const auto z = q.apply(sp.flat_point(1, 3, fv({1, 0})));
  ASSERT_TRUE(z.is_net());
  EXPECT_EQ(z.net(), sp.attachment_point(1, 4));
}

TEST(ScalingMap, PreimageMatchesBruteForce) {
  const auto sp = sol_glued(2.0);
  const GluedScalingMap q(sp, 1);
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> kd(-1, 1), md(-20, 20), jd(-6, 6), vd(-3, 3), ad(-4, 4);
  // Net sources of |m| <= 20 near height 0 lie within |k| <= 2, |m| <= 80; flat sources have |v| <= 10.
  std::vector<GluedPoint> cand = glued_window(sp, 2, 80, 10, sp.index_range() - 1);
  for (int trial = 0; trial < 4; ++trial) {
    GluedSet A;
    for (int i = 0; i < 20; ++i) A.insert(GluedPoint::on_net(oracle::index({kd(rng)}, {md(rng), md(rng)})));
    for (int i = 0; i < 6; ++i) A.insert(GluedPoint::on_net(sp.attachment_point(1, ad(rng))));
    for (int i = 0; i < 10; ++i) {
      const auto v = fv({vd(rng), vd(rng)});
      A.insert(sp.flat_point(1, jd(rng), v));
    }
    GluedSet brute;
    for (const auto& c : cand)
      if (A.contains(q.apply(c))) brute.insert(c);
    EXPECT_EQ(preimage(q, A), brute);
    EXPECT_EQ(preimage_count(q, A), brute.size());
  }
}

TEST(ScalingMap, BoxPreimageCountsFlatSources) {
  const auto sp = sol_glued(2.0);
  const GluedScalingMap q(sp, 1);
  const GluedBoxSet S(NetBoxSet(Box({{0, 70}, {0, 9}}, {{-0.5, 0.5}})));
  GluedSet A;
  S.for_each([&](const GluedPoint& p) { A.insert(p); });
  EXPECT_EQ(preimage_count(q, S), preimage_count(q, A));
  // a_0..a_3 = (1,1), (4,0), (16,0), (64,0) and a_{-1..-3} = (0,2), (0,4), (0,8) lie in S;
  // each has the single flat source (1, 0) one index down.
  EXPECT_EQ(preimage_count(q, S), preimage_count(q.net_map(), S.net()) + 7);
}

TEST(Drift, TrivialSlopes) {
  const auto sp = sol_glued(2.0);
  for (double d : attachment_drift(sp, 1.0, 1, 30)) EXPECT_EQ(d, 0.0);
  for (double d : attachment_drift(sp, 4.0, 1, 30)) EXPECT_EQ(d, 0.0);
  EXPECT_THROW(attachment_drift(sp, 2.0, 1, 31), RangeError);
  EXPECT_THROW(attachment_drift(sp, -2.0, 1, 5), DomainError);
}

TEST(Drift, SlopeGammaGrows) {
  const auto sp = sol_glued(2.0);
  const auto d = attachment_drift(sp, 2.0, 1, 30);
  // Image (2^{2j+1}, 0) sits a factor 2 from the nearest attachment; in the first factor that
  // costs about 2 asinh(2^{2j-1}), linear in j.
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_GT(d[i], d[i - 1]);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = std::ldexp(1.0, 2 * static_cast<int>(i + 1));
    EXPECT_NEAR(d[i], oracle::hyperbolic(2 * x, 1.0, x, 1.0), 1e-9 * d[i]);
  }
  EXPECT_GT(d.back(), 3.0 * net_separation_constant());
}
