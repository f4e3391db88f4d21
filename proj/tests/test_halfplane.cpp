#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "hypscatter/halfplane.hpp"
#include "oracles.hpp"

using namespace hypscatter;

namespace {

oracle::IntMat as_int(const MoebiusMap& m) {
  return oracle::projective({std::llround(m.a()), std::llround(m.b()), std::llround(m.c()), std::llround(m.d())});
}

}  // namespace

TEST(HPoint, RejectsNonPositiveHeight) {
  EXPECT_THROW(HPoint(0.0, 0.0), Error);
  EXPECT_THROW(HPoint(1.0, -2.0), Error);
}

TEST(Moebius, ActionExamples) {
  const HPoint i(0.0, 1.0);
  const HPoint t = apply_moebius(MoebiusMap::T(), i);
  EXPECT_DOUBLE_EQ(t.x, 1.0);
  EXPECT_DOUBLE_EQ(t.y, 1.0);
  const HPoint s = apply_moebius(MoebiusMap::S(), i);
  EXPECT_NEAR(s.x, 0.0, 1e-15);
  EXPECT_NEAR(s.y, 1.0, 1e-15);
  const HPoint s2 = apply_moebius(MoebiusMap::S(), HPoint(0.0, 2.0));
  EXPECT_NEAR(s2.x, 0.0, 1e-15);
  EXPECT_NEAR(s2.y, 0.5, 1e-15);
}

TEST(Moebius, RejectsWrongDeterminant) { EXPECT_THROW(MoebiusMap::make(2, 0, 0, 1), Error); }

TEST(Moebius, ComposeExamples) {
  EXPECT_TRUE(compose_normalize(MoebiusMap::T(), MoebiusMap::T().inverse()).is_identity());
  EXPECT_TRUE(compose_normalize(MoebiusMap::S(), MoebiusMap::S()).is_identity());
  const HPoint v = apply_moebius(compose_normalize(MoebiusMap::T(), MoebiusMap::S()), HPoint(0.0, 1.0));
  EXPECT_NEAR(v.x, 1.0, 1e-14);
  EXPECT_NEAR(v.y, 1.0, 1e-14);
}

TEST(Moebius, CompositionMatchesSequentialApplication) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(0.1, 4.0);
  const auto ball = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 4.0);
  std::uniform_int_distribution<std::size_t> pick(0, ball.elements.size() - 1);
  for (int k = 0; k < 100; ++k) {
    const MoebiusMap& g = ball.elements[pick(rng)].g;
    const MoebiusMap& h = ball.elements[pick(rng)].g;
    const HPoint z(ux(rng), uy(rng));
    const HPoint a = apply_moebius(compose_normalize(g, h), z);
    const HPoint b = apply_moebius(g, apply_moebius(h, z));
    EXPECT_LT(hyp_distance(a, b), 1e-9);
    const MoebiusMap gh = compose_normalize(g, h);
    EXPECT_NEAR(gh.a() * gh.d() - gh.b() * gh.c(), 1.0, 1e-12);
  }
}

TEST(Moebius, SignNormalization) {
  const MoebiusMap m = MoebiusMap::make(-1, -2, -1, -3);
  EXPECT_GT(m.a(), 0.0);
  EXPECT_TRUE(m.close_to(MoebiusMap::make(1, 2, 1, 3), 1e-12));
}

TEST(Distance, ClosedForms) {
  EXPECT_EQ(hyp_distance(HPoint(0, 1), HPoint(0, 1)), 0.0);
  EXPECT_NEAR(hyp_distance(HPoint(0, 1), HPoint(0, 2)), std::log(2.0), 1e-12);
  EXPECT_NEAR(hyp_distance(HPoint(0, 2), HPoint(0, 0.5)), 2.0 * std::log(2.0), 1e-12);
}

TEST(Distance, SymmetricAndIsometryInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(0.2, 3.0);
  const auto ball = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 5.0);
  std::uniform_int_distribution<std::size_t> pick(0, ball.elements.size() - 1);
  for (int k = 0; k < 100; ++k) {
    const HPoint z(ux(rng), uy(rng));
    const HPoint w(ux(rng), uy(rng));
    const MoebiusMap& g = ball.elements[pick(rng)].g;
    EXPECT_DOUBLE_EQ(hyp_distance(z, w), hyp_distance(w, z));
    EXPECT_NEAR(hyp_distance(apply_moebius(g, z), apply_moebius(g, w)), hyp_distance(z, w), 1e-10);
  }
}

TEST(Stabilizer, EllipticAndGenericPoints) {
  const auto g = FuchsianGroup::modular();
  EXPECT_EQ(stabilizer_order(g, HPoint(0.0, 1.0)), 2);
  EXPECT_EQ(stabilizer_order(g, HPoint(0.5, std::sqrt(3.0) / 2.0)), 3);
  EXPECT_EQ(stabilizer_order(g, HPoint(0.3, 1.3)), 1);
}

TEST(Stabilizer, MatchesWordOracle) {
  const auto words = oracle::modular_words(8);
  const struct {
    double x, y;
  } pts[] = {{0.0, 1.0}, {0.5, std::sqrt(3.0) / 2.0}, {0.3, 1.3}};
  for (const auto& p : pts) {
    int count = 0;
    for (const auto& w : words) count += oracle::cosh_displacement(w, p.x, p.y) - 1.0 < 1e-12;
    EXPECT_EQ(stabilizer_order(FuchsianGroup::modular(), HPoint(p.x, p.y)), count);
  }
}

TEST(OrbitBall, SmallBallsAtTwoI) {
  const auto g = FuchsianGroup::modular();
  const auto b = enumerate_orbit_ball(g, HPoint(0.0, 2.0), 0.5);
  ASSERT_EQ(b.elements.size(), 2u);
  for (const auto& e : b.elements) EXPECT_NEAR(e.length, std::acosh(9.0 / 8.0), 1e-12);
  std::set<oracle::IntMat> got;
  for (const auto& e : b.elements) got.insert(as_int(e.g));
  EXPECT_EQ(got, (std::set<oracle::IntMat>{{1, 1, 0, 1}, {1, -1, 0, 1}}));

  const auto b2 = enumerate_orbit_ball(g, HPoint(0.0, 2.0), 1.4);
  bool has_s = false;
  for (const auto& e : b2.elements) {
    if (as_int(e.g) == oracle::IntMat{0, 1, -1, 0}) {
      has_s = true;
      EXPECT_NEAR(e.length, 2.0 * std::log(2.0), 1e-12);
    }
  }
  EXPECT_TRUE(has_s);
}

TEST(OrbitBall, EqualsBruteForceWordSearch) {
  const double x = 0.3, y = 1.3, R = 3.0;
  std::set<oracle::IntMat> expected;
  for (const auto& w : oracle::modular_words(12)) {
    const double c = oracle::cosh_displacement(w, x, y);
    if (c - 1.0 > 1e-12 && c <= std::cosh(R)) expected.insert(w);
  }
  const auto b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(x, y), R);
  std::set<oracle::IntMat> got;
  for (const auto& e : b.elements) got.insert(as_int(e.g));
  EXPECT_EQ(got.size(), b.elements.size());
  EXPECT_EQ(got, expected);
}

TEST(OrbitBall, Invariants) {
  const auto b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 6.0);
  std::set<oracle::IntMat> all;
  for (std::size_t i = 0; i < b.elements.size(); ++i) {
    EXPECT_GT(b.elements[i].length, 0.0);
    if (i > 0) {
      EXPECT_LE(b.elements[i - 1].length, b.elements[i].length);
    }
    all.insert(as_int(b.elements[i].g));
  }
  EXPECT_EQ(all.size(), b.elements.size());
  for (const auto& e : b.elements) {
    const auto inv = as_int(e.g.inverse());
    EXPECT_TRUE(all.count(inv)) << "missing inverse";
    EXPECT_NEAR(hyp_distance(apply_moebius(e.g.inverse(), b.base), b.base), e.length, 1e-10);
  }
}

TEST(OrbitBall, EllipticBaseKeepsStabilizerCosets) {
  const auto b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.0, 1.0), 3.0);
  EXPECT_EQ(b.stabilizer_order, 2);
  // Orbit points come in pairs gamma, gamma S.
  EXPECT_EQ(b.elements.size() % 2, 0u);
}

TEST(OrbitBall, MonotoneInRadius) {
  const auto g = FuchsianGroup::modular();
  const auto small = enumerate_orbit_ball(g, HPoint(0.3, 1.3), 4.0);
  const auto big = enumerate_orbit_ball(g, HPoint(0.3, 1.3), 5.0);
  std::set<oracle::IntMat> bigset;
  for (const auto& e : big.elements) bigset.insert(as_int(e.g));
  for (const auto& e : small.elements) EXPECT_TRUE(bigset.count(as_int(e.g)));
  EXPECT_GT(big.elements.size(), small.elements.size());
}

TEST(OrbitBall, GrowthIsExponential) {
  const auto g = FuchsianGroup::modular();
  const double c6 = enumerate_orbit_ball(g, HPoint(0.3, 1.3), 6.0).elements.size() * std::exp(-6.0);
  const double c8 = enumerate_orbit_ball(g, HPoint(0.3, 1.3), 8.0).elements.size() * std::exp(-8.0);
  EXPECT_NEAR(c8 / c6, 1.0, 0.25);
}

TEST(OrbitBall, OverflowCap) {
  OrbitBallOptions opt;
  opt.max_elements = 100;
  try {
    enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 8.0, opt);
    FAIL() << "expected BallOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BallOverflow);
  }
}

TEST(OrbitBall, RejectsNonPositiveRadius) {
  EXPECT_THROW(enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 0.0), Error);
}

TEST(OrbitBall, GenericGroupMatchesModular) {
  const auto gen = FuchsianGroup::generic({MoebiusMap::T(), MoebiusMap::S()});
  const auto a = enumerate_orbit_ball(gen, HPoint(0.3, 1.3), 4.0);
  const auto b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.3, 1.3), 4.0);
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) EXPECT_NEAR(a.elements[i].length, b.elements[i].length, 1e-12);
}

TEST(Reduction, Examples) {
  const auto [z1, g1] = reduce_to_fundamental_domain(HPoint(5.0, 1.0));
  EXPECT_NEAR(z1.x, 0.0, 1e-14);
  EXPECT_NEAR(z1.y, 1.0, 1e-14);
  EXPECT_TRUE(g1.close_to(MoebiusMap::make(1, -5, 0, 1), 1e-12));
  const auto [z2, g2] = reduce_to_fundamental_domain(HPoint(0.0, 0.5));
  EXPECT_NEAR(z2.y, 2.0, 1e-14);
  EXPECT_TRUE(g2.close_to(MoebiusMap::S(), 1e-12));
  const HPoint z(3.7, 0.02);
  const auto [z3, g3] = reduce_to_fundamental_domain(z);
  EXPECT_LE(std::abs(z3.x), 0.5 + 1e-12);
  EXPECT_GE(std::norm(z3.z()), 1.0 - 1e-12);
  EXPECT_GE(z3.y, std::sqrt(3.0) / 2.0 - 1e-12);
  EXPECT_LT(hyp_distance(apply_moebius(g3, z), z3), 1e-9);
}

TEST(Reduction, GenericGroupRejected) {
  const auto gen = FuchsianGroup::generic({MoebiusMap::T(), MoebiusMap::S()});
  try {
    reduce_to_fundamental_domain(gen, HPoint(0.2, 0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonModularGroup);
  }
}

TEST(OrbitBallCsv, HeaderAndDeterminism) {
  const auto b = enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.0, 2.0), 0.5);
  std::ostringstream a, c;
  write_orbit_ball_csv(a, b);
  write_orbit_ball_csv(c, enumerate_orbit_ball(FuchsianGroup::modular(), HPoint(0.0, 2.0), 0.5));
  EXPECT_EQ(a.str(), c.str());
  EXPECT_EQ(a.str().substr(0, 15), "a,b,c,d,length\n");
  EXPECT_NE(a.str().find("0.49493292309452691"), std::string::npos);
}
