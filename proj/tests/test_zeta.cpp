#include <gtest/gtest.h>

#include <random>

#include "ellgamma/zeta.hpp"
#include "support.hpp"

using namespace ellgamma;
using namespace testsupport;

namespace {

// p = 2 over Z[s]/(3^6, u(s)), deg u = 2: mu_8 and sqrt(2) are available.
RingPtr ring9() {
  static RingPtr R = Ring::make_unramified(3, 6, 2);
  return R;
}
RingPtr ring17() {
  static RingPtr R = Ring::make_unramified(17, 3, 2);
  return R;
}

FractionS geometric(const std::vector<Element>& roots, const Element& scale) {
  const RingPtr& R = scale.ring();
  LaurentPoly d = LaurentPoly::constant(R->one());
  for (const auto& r : roots) d = d * LaurentPoly::one_minus(R, {r});
  return FractionS(LaurentPoly::constant(scale), d);
}

MultiplicativeCharacter quadratic(const RingPtr& R, i64 p, const Element& at_pi) {
  // conductor 2 for p = 2: chi(-1) = -1
  return MultiplicativeCharacter::from_generators(at_pi, p, 2, {R->from_int(-1)});
}

}  // namespace

TEST(Zeta, SphericalN2IsGeometric) {
  std::mt19937_64 rng(31);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  for (int t = 0; t < 5; ++t) {
    const Element a = random_unit(R, rng), b = random_unit(R, rng);
    const ZetaResult z = zeta_integral(Whittaker::spherical({a, b}, psi), 0);
    EXPECT_EQ(z.value, geometric({a, b}, R->from_int(p - 1)));
    EXPECT_TRUE(z.recurrence_verified);
    // raw series: (q X)^m b_m with b_m = (q - 1) q^-m h_m
    const auto coeffs = z.value.expand(0, 9);
    Element ap = R->one();
    for (int m = 0; m < 10; ++m) {
      Element h = R->zero();
      for (int i = 0; i <= m; ++i) h += a.pow(i) * b.pow(m - i);
      EXPECT_EQ(coeffs[m], R->from_int(p - 1) * h);
    }
  }
}

TEST(Zeta, CharacteristicFunctionOfU1) {
  std::mt19937_64 rng(32);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker W = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng)}, psi);
  // Kirillov function q^2 chi(a) 1_{1 + 4 Z_2}(a) W(diag(a, 1)) at valuation 0, zero elsewhere
  const Whittaker V = psi_average(W.twist(quadratic(R, p, R->one())), 2);
  const Element qinv2 = R->from_int(p).inverse()->pow(2);
  const FractionS Z = zeta_integral(V, 0).value.scaled(qinv2);
  // integrate_units(char U^(2)) = p^-1, the mass of 1 + 4 Z_2
  EXPECT_EQ(Z, FractionS::one(R).scaled(*R->from_int(p).inverse()));

  const RingPtr R3 = Ring::make_ramified(3, 6, {1, 1, 1}, 6);  // p = 7: mu_7 and an order-3 character
  const AdditiveCharacter psi7 = AdditiveCharacter::make(R3, 7);
  const Whittaker W7 = Whittaker::spherical({random_unit(R3, rng), random_unit(R3, rng)}, psi7);
  const MultiplicativeCharacter chi = MultiplicativeCharacter::from_generators(R3->one(), 7, 1, {R3->gen_t()});
  const FractionS Z7 = zeta_integral(psi_average(W7.twist(chi), 1), 0).value.scaled(*R3->from_int(7).inverse());
  EXPECT_EQ(Z7, FractionS::one(R3));
}

TEST(Zeta, ShiftLaw) {
  std::mt19937_64 rng(33);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker s2 = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng)}, psi);
  const Whittaker s3 = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng), random_unit(R, rng)}, psi);
  const std::vector<Whittaker> ws{
      s2,
      s2.twist(MultiplicativeCharacter::unramified(random_unit(R, rng), p)),
      psi_average(s2.twist(quadratic(R, p, random_unit(R, rng))), 2),
      s2.translate(PAdicMatrix::elementary(2, 0, 1, PAdic::p_power(p, -1))),
      s2.tilde(),
      s3,
      s3.translate(PAdicMatrix::w(p, 3)),
  };
  for (const Whittaker& W : ws) {
    const int n = W.n();
    const Element qn1 = R->from_int(ipow(p, n - 1));
    const FractionS Z = zeta_integral(W, 0).value;
    for (int k = -3; k <= 3; ++k) {
      std::vector<int> e(n, 0);
      e[0] = k;
      const FractionS Zk = zeta_integral(W.translate(PAdicMatrix::torus(p, e)), 0).value;
      EXPECT_EQ(Zk, Z * FractionS::monomial(qn1.pow_signed(-k), -k)) << W.descriptor() << " k=" << k;
    }
  }
}

TEST(Zeta, LFactorGL1) {
  const RingPtr R = Ring::make_ramified(3, 6, {1, 1, 1});
  const Element c = R->one() + R->gen_t();
  EXPECT_EQ(l_factor_gl1(MultiplicativeCharacter::unramified(c, 7)),
            FractionS(LaurentPoly::constant(R->one()), LaurentPoly::one_minus(R, {c})));
  EXPECT_EQ(l_factor_gl1(MultiplicativeCharacter::unramified(R->one(), 7)).pretty(), "1/(1-X)");
  const auto chi2 = MultiplicativeCharacter::from_generators(c, 7, 1, {R->gen_t()});
  EXPECT_EQ(l_factor_gl1(chi2), FractionS::one(R));
}

TEST(Zeta, GammaN2Spherical) {
  std::mt19937_64 rng(34);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  for (int t = 0; t < 3; ++t) {
    const Whittaker W = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng)}, psi);
    const auto battery = default_battery(W);
    ASSERT_GE(battery.size(), 12u);
    const GammaCertificate cert = gamma_factor(battery);
    for (const auto& e : cert.battery) EXPECT_TRUE(e.equal) << e.id;
    ASSERT_TRUE(cert.second_pivot);
    EXPECT_TRUE(cert.pivot_independent);
    EXPECT_TRUE(cert.verified());
  }
}

TEST(Zeta, GammaOfUnramifiedTwist) {
  std::mt19937_64 rng(35);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Element a = random_unit(R, rng), b = random_unit(R, rng), c = random_unit(R, rng);
  const Whittaker W = Whittaker::spherical({a, b}, psi);
  const auto g1 = gamma_factor(default_battery(W.twist(MultiplicativeCharacter::unramified(c, p))));
  const auto g2 = gamma_factor(default_battery(Whittaker::spherical({c * a, c * b}, psi)));
  EXPECT_TRUE(g1.verified());
  EXPECT_TRUE(g2.verified());
  EXPECT_EQ(g1.gamma, g2.gamma);
}

TEST(Zeta, GammaRamifiedTwist) {
  std::mt19937_64 rng(36);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker W = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng)}, psi).twist(quadratic(R, p, R->one()));
  const GammaCertificate cert = gamma_factor(default_battery(W, 2));
  EXPECT_TRUE(cert.verified());
  // the untranslated twist alone has zeta 0
  EXPECT_TRUE(zeta_integral(W, 0).value.is_zero());
  EXPECT_THROW(gamma_factor({{"W", W, 0}}), ContractError);
}

TEST(Zeta, GammaN3WithJ1) {
  std::mt19937_64 rng(37);
  const RingPtr R = ring17();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker W = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng), random_unit(R, rng)}, psi);
  const auto battery = default_battery(W);
  const GammaCertificate cert = gamma_factor(battery);
  int j1 = 0;
  for (const auto& e : cert.battery) {
    EXPECT_TRUE(e.equal) << e.id << " j=" << e.j;
    j1 += e.j == 1;
  }
  EXPECT_GE(j1, 5);
  EXPECT_TRUE(cert.verified());
}

TEST(Zeta, J1Stabilization) {
  std::mt19937_64 rng(38);
  const RingPtr R = ring17();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker W = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng), random_unit(R, rng)}, psi);
  for (const auto& b : default_battery(W)) {
    if (b.j != 1) continue;
    ZetaOptions wide;
    wide.zero_shells = 3;
    const ZetaResult z = zeta_integral(b.W, 1), zw = zeta_integral(b.W, 1, wide);
    EXPECT_EQ(z.value, zw.value) << b.id;
    EXPECT_LE(z.x_window, zw.x_window);
  }
}

// Z(W; 1) equals Z(W'; 0) for W' = sum over x of vol(x + p^L O) rho(I + x E21) W
TEST(Zeta, J1AgainstTranslateDecomposition) {
  std::mt19937_64 rng(39);
  const RingPtr R = ring17();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  const Whittaker S = Whittaker::spherical({random_unit(R, rng), random_unit(R, rng), random_unit(R, rng)}, psi);
  for (const Whittaker& W : {S, S.translate(PAdicMatrix::torus(p, {1, 0, 0})), dual_whittaker(S),
                            S.translate(PAdicMatrix::elementary(3, 1, 0, PAdic::p_power(p, -1)))}) {
    const ZetaResult z = zeta_integral(W, 1);
    // two shells beyond the stabilized window, so the vanishing shells are summed too
    const int M = std::max(z.x_window, 0) + 2, L = z.x_resolution;
    const Element cell = self_dual_volume(R, p, 1) * R->from_int(p).inverse()->pow_signed(L);
    std::vector<std::pair<Element, Whittaker>> terms;
    for (i64 u = 0; u < ipow(p, M + L); ++u) {
      const PAdic x = PAdic(p, u).shifted(-M);
      terms.push_back({cell, W.translate(PAdicMatrix::elementary(3, 1, 0, x), "u")});
    }
    EXPECT_EQ(zeta_integral(Whittaker::combination(terms), 0).value, z.value) << W.descriptor();
  }
}

TEST(Zeta, RationalityOnRandomEvaluators) {
  std::mt19937_64 rng(40);
  const RingPtr R = ring9();
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + (t % 3 == 2);
    std::vector<Element> a;
    for (int i = 0; i < n; ++i) a.push_back(random_unit(R, rng));
    Whittaker W = Whittaker::spherical(a, psi);
    if (t % 4 == 1) W = W.twist(MultiplicativeCharacter::unramified(random_unit(R, rng), p));
    if (t % 5 == 2) W = psi_average(W.twist(quadratic(R, p, random_unit(R, rng))), 2);
    if (t % 2 == 0) W = W.translate(random_k(p, n, rng) * PAdicMatrix::torus(p, std::vector<int>(n, t % 3 - 1)));
    const ZetaResult z = zeta_integral(W, 0);
    EXPECT_TRUE(z.value.denominator().first().is_unit());
    EXPECT_TRUE(z.value.denominator().last().is_unit());
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(Zeta, ProductRingComponentwise) {
  std::mt19937_64 rng(41);
  const RingPtr A = ring9(), B = Ring::make_unramified(3, 4, 2);
  const RingPtr P = Ring::make_product({A, B});
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(P, p);
  const Element a = random_unit(P, rng), b = random_unit(P, rng);
  const Whittaker W = Whittaker::spherical({a, b}, psi);
  const GammaCertificate cert = gamma_factor(default_battery(W));
  EXPECT_TRUE(cert.verified());
  EXPECT_EQ(cert.components.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const RingMap pr = RingMap::projection(P, i);
    const GammaCertificate ci = gamma_factor(default_battery(W.base_change(pr)));
    EXPECT_EQ(cert.gamma.map_coefficients(pr), ci.gamma);
  }
}

TEST(Zeta, SquareRoot) {
  std::mt19937_64 rng(42);
  for (const RingPtr& R : {ring9(), ring17(), Ring::make_ramified(3, 6, {1, 1, 1}, 2)}) {
    for (int t = 0; t < 50; ++t) {
      const Element x = random_unit(R, rng);
      const auto r = square_root(x * x);
      ASSERT_TRUE(r);
      EXPECT_EQ(*r * *r, x * x);
    }
  }
  EXPECT_FALSE(square_root(Ring::make_unramified(3, 4, 1)->from_int(2)));
}
