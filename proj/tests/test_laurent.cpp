#include <gtest/gtest.h>

#include <random>

#include "ellgamma/laurent.hpp"

using namespace ellgamma;

namespace {

LaurentPoly poly(const RingPtr& R, int low, std::vector<i64> c) {
  std::vector<Element> e;
  for (auto v : c) e.push_back(R->from_int(v));
  return LaurentPoly(R, low, e);
}

Element random_unit(const RingPtr& R, std::mt19937_64& rng) {
  while (true) {
    auto x = R->random(rng);
    if (x.is_unit()) return x;
  }
}

LaurentPoly random_poly(const RingPtr& R, std::mt19937_64& rng, int low, int len) {
  std::vector<Element> c;
  for (int i = 0; i < len; ++i) c.push_back(R->random(rng));
  return LaurentPoly(R, low, c);
}

FractionS random_fraction(const RingPtr& R, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(0, 3), lo(-2, 2);
  const int d = deg(rng);
  std::vector<Element> den{random_unit(R, rng)};
  for (int i = 1; i < d; ++i) den.push_back(R->random(rng));
  if (d > 0) den.push_back(random_unit(R, rng));
  return FractionS(random_poly(R, rng, lo(rng), deg(rng) + 1), LaurentPoly(R, lo(rng), den));
}

}  // namespace

TEST(Laurent, SumOfGeometricSeries) {
  auto R = Ring::make_unramified(3, 4, 1);
  FractionS g(poly(R, 0, {1}), poly(R, 0, {1, -1}));
  EXPECT_EQ(g + g, FractionS(poly(R, 0, {2}), poly(R, 0, {1, -1})));
  EXPECT_EQ((g + g).pretty(), "2/(1-X)");
}

TEST(Laurent, CrossMultiplicationEquality) {
  auto R = Ring::make_unramified(3, 4, 1);
  EXPECT_EQ(FractionS(poly(R, 0, {1, 0, -1}), poly(R, 0, {1, -1})), FractionS(poly(R, 0, {1, 1})));
  auto Z9 = Ring::make_unramified(3, 2, 1);
  FractionS a(poly(Z9, 1, {1}), poly(Z9, 0, {1, 3}));
  FractionS b(poly(Z9, 1, {1, -3}));
  // oracle: X*1 vs X(1-3X)(1+3X) = X - 9X^3 over Z/9
  EXPECT_EQ(poly(Z9, 1, {1}), poly(Z9, 1, {1, -3}) * poly(Z9, 0, {1, 3}));
  EXPECT_TRUE(a == b);
}

TEST(Laurent, NonInvertibleDenominatorRejected) {
  auto R = Ring::make_unramified(3, 4, 1);
  EXPECT_THROW(FractionS(poly(R, 0, {1}), poly(R, 0, {3, 9})), ContractError);
  // invertible but outside S: moved into S
  FractionS f(poly(R, 0, {1}), poly(R, 0, {3, 1}));
  EXPECT_TRUE(f.denominator().in_S());
  EXPECT_EQ(f * FractionS(poly(R, 0, {3, 1})), FractionS::one(R));
}

TEST(Laurent, RationalizeGeometric) {
  auto R = Ring::make_unramified(3, 5, 1);
  const Element a = R->from_int(5);
  RecurrentStream s{R, 0, {}, 1, {a}};
  for (int m = 0; m < 9; ++m) s.values.push_back(a.pow(m));
  EXPECT_EQ(rationalize(s), FractionS(poly(R, 0, {1}), poly(R, 0, {1, -5})));
}

TEST(Laurent, RationalizeCompleteHomogeneous) {
  auto R = Ring::make_unramified(3, 5, 1);
  const Element a = R->from_int(2), b = R->from_int(7);
  RecurrentStream s{R, 0, {}, 2, {a + b, -(a * b)}};
  // h_m(a,b) by brute-force double sum
  for (int m = 0; m < 12; ++m) {
    Element h = R->zero();
    for (int i = 0; i <= m; ++i) h += a.pow(i) * b.pow(m - i);
    s.values.push_back(h);
  }
  FractionS want(poly(R, 0, {1}), LaurentPoly::one_minus(R, {a}) * LaurentPoly::one_minus(R, {b}));
  EXPECT_EQ(rationalize(s), want);
  s.values[10] += R->one();
  EXPECT_THROW(rationalize(s), VerificationError);
}

TEST(Laurent, RationalizeFiniteStream) {
  auto R = Ring::make_unramified(3, 5, 1);
  RecurrentStream s{R, 0, {R->one(), R->zero(), R->zero()}, 1, {}};
  EXPECT_EQ(rationalize(s), FractionS::one(R));
}

TEST(Laurent, Expand) {
  auto R = Ring::make_unramified(3, 4, 1);
  FractionS g(poly(R, 0, {1}), poly(R, 0, {1, -1}));
  EXPECT_EQ(g.expand(0, 3), std::vector<Element>(4, R->one()));
  FractionS p(poly(R, 0, {1, 1}));
  EXPECT_EQ(p.expand(-1, 2), (std::vector<Element>{R->zero(), R->one(), R->one(), R->zero()}));
}

TEST(Laurent, SubstituteInverse) {
  auto R = Ring::make_unramified(3, 4, 1);
  const i64 q = 7;
  const Element alpha = R->from_int(4);
  const Element q2 = R->from_int(q * q);
  FractionS f(LaurentPoly::one_minus(R, {alpha}));
  // (q^2 X - alpha) / (q^2 X)
  FractionS want(poly(R, 0, {-4, q * q}), poly(R, 1, {q * q}));
  EXPECT_EQ(f.substitute_inverse(q2), want);
  FractionS g(poly(R, 0, {1}), LaurentPoly::one_minus(R, {alpha}));
  EXPECT_EQ(g.substitute_inverse(R->from_int(q)), FractionS(poly(R, 1, {q}), poly(R, 0, {-4, q})));
}

TEST(Laurent, MapCoefficients) {
  auto Z = Ring::make_unramified(3, 4, 1);
  auto F = Ring::make_fiber(Z, Z);
  const Element c = F->from_parts({Z->from_int(2), Z->from_int(5)});
  FractionS f(LaurentPoly::constant(F->one()), LaurentPoly::one_minus(F, {c}));
  EXPECT_EQ(f.map_coefficients(RingMap::projection(F, 0)),
            FractionS(poly(Z, 0, {1}), poly(Z, 0, {1, -2})));
  auto red = f.map_coefficients(RingMap::residue(F));
  EXPECT_TRUE(red.denominator().in_S());
}

TEST(Laurent, Inverse) {
  auto Z = Ring::make_unramified(3, 3, 1);
  // (1 + 3X + X^2) is in S; (3 + X + 3X^2) is not but is still invertible
  FractionS a(poly(Z, 0, {3, 1, 3}));
  auto ai = a.inverse();
  ASSERT_TRUE(ai);
  EXPECT_EQ(a * *ai, FractionS::one(Z));
  EXPECT_FALSE(FractionS(poly(Z, 0, {3, 9})).inverse());
  auto P = Ring::make_product({Z, Ring::make_unramified(3, 2, 1)});
  auto b = FractionS(LaurentPoly(P, 0, {P->from_parts({Z->from_int(1), P->components()[1]->from_int(3)}),
                                        P->from_parts({Z->from_int(3), P->components()[1]->from_int(1)})}));
  auto bi = b.inverse();
  ASSERT_TRUE(bi);
  EXPECT_EQ(b * *bi, FractionS::one(P));
}

TEST(LaurentProperty, RoundTripAndInvolution) {
  std::mt19937_64 rng(21);
  std::vector<RingPtr> rings{Ring::make_unramified(3, 4, 1), Ring::make_ramified(3, 3, {1, 1, 1}),
                             Ring::make_fiber(Ring::make_unramified(5, 2, 1), Ring::make_unramified(5, 3, 1))};
  int cases = 0;
  for (const auto& R : rings)
    for (int i = 0; i < 400; ++i, ++cases) {
      FractionS f = random_fraction(R, rng);
      ASSERT_TRUE(f.denominator().coeff(0).is_one());
      ASSERT_TRUE(f.denominator().last().is_unit());
      ASSERT_TRUE(f.witness().verify());
      // stream of f -> rationalize -> f, when the numerator sits in [0, deg D)
      const auto& D = f.denominator();
      const int r = D.high();
      if (!f.numerator().is_zero() && f.numerator().low() >= 0) {
        const int tail = std::max(r, f.numerator().high() + 1);
        RecurrentStream s{R, 0, f.expand(0, tail + 8), tail, {}};
        for (int k = 1; k <= r; ++k) s.recurrence.push_back(-D.coeff(k));
        ASSERT_EQ(rationalize(s), f);
      }
      const Element u = R->from_int(49);
      auto g = f.substitute_inverse(u);
      ASSERT_TRUE(g.denominator().in_S());
      ASSERT_EQ(g.substitute_inverse(u), f);
    }
  EXPECT_GE(cases, 1000);
}

TEST(LaurentProperty, EqualityIsCongruence) {
  std::mt19937_64 rng(22);
  auto R = Ring::make_unramified(3, 3, 1);
  for (int i = 0; i < 1000; ++i) {
    FractionS x = random_fraction(R, rng), z = random_fraction(R, rng);
    // y: same value as x with a different representation
    const LaurentPoly s = LaurentPoly::one_minus(R, {R->random(rng)}).shifted(i % 3 - 1);
    FractionS y(x.numerator() * s, x.denominator() * s);
    ASSERT_TRUE(x == x);
    ASSERT_TRUE(x == y && y == x);
    FractionS w(y.numerator().scaled(R->from_int(2)), y.denominator().scaled(R->from_int(2)));
    ASSERT_TRUE(y == w && x == w);
    ASSERT_TRUE(x * z == y * z);
    ASSERT_TRUE(x + z == y + z);
  }
}

TEST(LaurentProperty, MapsCommuteWithOperations) {
  std::mt19937_64 rng(23);
  auto E = Ring::make_ramified(3, 3, {1, 1, 1});
  auto F = Ring::make_fiber(Ring::make_unramified(3, 3, 1), E);
  std::vector<RingMap> maps{RingMap::projection(F, 0), RingMap::projection(F, 1), RingMap::residue(F)};
  const Element u = F->from_int(7);
  for (int i = 0; i < 1000; ++i) {
    const auto& phi = maps[i % 3];
    FractionS a = random_fraction(F, rng), b = random_fraction(F, rng);
    ASSERT_EQ((a + b).map_coefficients(phi), a.map_coefficients(phi) + b.map_coefficients(phi));
    ASSERT_EQ((a * b).map_coefficients(phi), a.map_coefficients(phi) * b.map_coefficients(phi));
    ASSERT_EQ(a.substitute_inverse(u).map_coefficients(phi), a.map_coefficients(phi).substitute_inverse(phi(u)));
  }
}
