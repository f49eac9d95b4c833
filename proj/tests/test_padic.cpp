#include <gtest/gtest.h>

#include <random>

#include "ellgamma/padic.hpp"

using namespace ellgamma;

namespace {

PAdic random_padic(i64 p, std::mt19937_64& rng, int vlo = -3, int vhi = 3) {
  std::uniform_int_distribution<i64> u(1, ipow(p, 8));
  std::uniform_int_distribution<int> v(vlo, vhi);
  i64 x = u(rng);
  while (x % p == 0) x = u(rng);
  return PAdic(p, x).shifted(v(rng));
}

// Product of elementary, torus and Weyl generators.  Valuation spreads stay
// small so products keep most of the 12 digits of relative precision.
PAdicMatrix random_gl(i64 p, int n, std::mt19937_64& rng) {
  PAdicMatrix g = PAdicMatrix::identity(p, n);
  std::uniform_int_distribution<int> pick(0, 3), idx(0, n - 1), e(-1, 1);
  for (int s = 0; s < 6; ++s) {
    switch (pick(rng)) {
      case 0: {
        int i = idx(rng), j = idx(rng);
        if (i != j) g = g * PAdicMatrix::elementary(n, i, j, random_padic(p, rng, -1, 1));
        break;
      }
      case 1: {
        std::vector<int> k(n);
        for (auto& x : k) x = e(rng);
        g = g * PAdicMatrix::torus(p, k);
        break;
      }
      case 2:
        g = g * PAdicMatrix::w(p, n);
        break;
      default: {
        int i = idx(rng), j = idx(rng);
        if (i != j) g = PAdicMatrix::elementary(n, i, j, random_padic(p, rng, 0, 1)) * g;
      }
    }
  }
  return g;
}

RingPtr mu7_ring() { return Ring::make_unramified(3, 4, 6); }

}  // namespace

TEST(PAdic, BasicArithmetic) {
  const PAdic a = PAdic::fraction(7, 3, 49);
  EXPECT_EQ(a.valuation(), -2);
  EXPECT_EQ(a * PAdic(7, 49), PAdic(7, 3));
  EXPECT_TRUE((PAdic(7, 5) - PAdic(7, 5)).is_zero());
  EXPECT_EQ((PAdic(7, 1) + PAdic(7, 6)).valuation(), 1);
  EXPECT_THROW(PAdic(7, 7).shifted(0).unit_mod(20), PrecisionError);
}

TEST(PAdic, IwasawaTrivialCases) {
  const i64 p = 7;
  auto u = PAdicMatrix::elementary(3, 0, 2, PAdic::fraction(p, 2, 7)) *
           PAdicMatrix::elementary(3, 1, 2, PAdic(p, 5));
  auto d = iwasawa_decompose(u);
  EXPECT_EQ(d.n, u);
  EXPECT_EQ(d.t, PAdicMatrix::identity(p, 3));
  EXPECT_EQ(d.k, PAdicMatrix::identity(p, 3));
  for (int n = 2; n <= 3; ++n) {
    auto w = PAdicMatrix::w(p, n);
    auto dw = iwasawa_decompose(w);
    EXPECT_EQ(dw.n, PAdicMatrix::identity(p, n));
    EXPECT_EQ(dw.t, PAdicMatrix::identity(p, n));
    EXPECT_EQ(dw.k, w);
  }
}

TEST(PAdic, WeylElements) {
  const i64 p = 5;
  auto w3 = PAdicMatrix::w(p, 3);
  EXPECT_EQ(w3, PAdicMatrix::from_ints(p, {{0, 0, 1}, {0, -1, 0}, {1, 0, 0}}));
  EXPECT_EQ(PAdicMatrix::w_prime(p, 3), PAdicMatrix::from_ints(p, {{-1, 0, 0}, {0, 0, -1}, {0, 1, 0}}));
  EXPECT_EQ(PAdicMatrix::w_prime(p, 2), PAdicMatrix::identity(p, 2));
}

TEST(PAdicProperty, FieldAxioms) {
  std::mt19937_64 rng(31);
  for (i64 p : {2, 5, 7}) {
    for (int i = 0; i < 400; ++i) {
      auto a = random_padic(p, rng), b = random_padic(p, rng), c = random_padic(p, rng);
      ASSERT_EQ((a + b) - b, a);
      ASSERT_EQ(a * (b + c), a * b + a * c);
      ASSERT_EQ((a * b) * c, a * (b * c));
      ASSERT_EQ(a * a.inverse(), PAdic(p, 1));
      ASSERT_EQ((a * b).valuation(), a.valuation() + b.valuation());
    }
  }
}

TEST(PAdicProperty, IwasawaRecomposes) {
  std::mt19937_64 rng(32);
  int cases = 0;
  for (i64 p : {2, 3, 7})
    for (int n = 1; n <= 3; ++n)
      for (int i = 0; i < 120; ++i, ++cases) {
        auto g = random_gl(p, n, rng);
        auto d = iwasawa_decompose(g);
        ASSERT_EQ(d.n * d.t * d.k, g) << g.str() << " => " << (d.n * d.t * d.k).str() << " n=" << d.n.str() << " t=" << d.t.str() << " k=" << d.k.str();
        ASSERT_TRUE(d.n.is_upper_unipotent());
        ASSERT_TRUE(d.k.is_integral());
        ASSERT_EQ(d.k.det().valuation(), 0);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c)
            if (r != c) {
              ASSERT_TRUE(d.t(r, c).is_zero());
            }
      }
  EXPECT_GE(cases, 1000);
}

TEST(PAdicProperty, InverseAndIota) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 1000; ++i) {
    auto g = random_gl(5, 3, rng);
    ASSERT_EQ(g * g.inverse(), PAdicMatrix::identity(5, 3));
    auto h = random_gl(5, 3, rng);
    ASSERT_EQ((g * h).iota(), g.iota() * h.iota());
  }
}

TEST(Characters, PsiKernelAndValues) {
  auto R = mu7_ring();
  auto psi = AdditiveCharacter::make(R, 7);
  EXPECT_EQ(psi.depth(), 1);
  EXPECT_TRUE(psi(PAdic(7, 7)).is_one());
  EXPECT_TRUE(psi(PAdic(7, 0)).is_one());
  const Element z = psi(PAdic(7, 1));
  EXPECT_FALSE(z.is_one());
  EXPECT_TRUE(z.pow(7).is_one());
  EXPECT_THROW(psi(PAdic::fraction(7, 1, 7)), MissingRootsError);
  for (i64 u = 1; u < 7; ++u) {
    Element s = R->zero();
    for (i64 x = 0; x < 7; ++x) s += psi(PAdic(7, x * u));
    EXPECT_TRUE(s.is_zero());
  }
}

TEST(Characters, PsiDeeper) {
  // mu_8 in W(F_9): psi with c = 1 reaches depth 3
  auto R = Ring::make_unramified(3, 4, 2);
  auto psi = AdditiveCharacter::make(R, 2);
  EXPECT_EQ(psi.depth(), 3);
  std::mt19937_64 rng(34);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_padic(2, rng, -2, 3), b = random_padic(2, rng, -2, 3);
    ASSERT_EQ(psi(a + b), psi(a) * psi(b));
    // kernel exactness
    ASSERT_EQ(psi(a).is_one(), a.valuation() >= 1);
  }
}

TEST(Characters, ChiValues) {
  auto R = Ring::make_ramified(3, 6, {1, 1, 1});
  const Element c = R->from_int(5);
  auto chi = MultiplicativeCharacter::unramified(c, 7);
  EXPECT_EQ(chi(PAdic(7, 49)), c * c);
  auto chi3 = MultiplicativeCharacter::from_generators(R->one(), 7, 1, {R->gen_t()});
  for (i64 u = 1; u < 7; ++u) EXPECT_TRUE(chi3.on_unit(u).pow(3).is_one());
  EXPECT_THROW(MultiplicativeCharacter::from_generators(R->one(), 7, 1, {R->from_int(2)}), ContractError);
  EXPECT_THROW(MultiplicativeCharacter::from_generators(R->one(), 7, 2, {R->gen_t()}), ContractError);
  std::mt19937_64 rng(35);
  auto mixed = chi * chi3;
  for (int i = 0; i < 1000; ++i) {
    auto a = random_padic(7, rng), b = random_padic(7, rng);
    ASSERT_EQ(mixed(a * b), mixed(a) * mixed(b));
  }
  EXPECT_EQ((chi3 * chi3.inverse()).conductor(), 0);
}

TEST(Characters, ChiPowerOfTwo) {
  auto R = Ring::make_unramified(3, 4, 2);
  auto i4 = primitive_root_of_unity(R, 2, 2);
  ASSERT_TRUE(i4);
  auto chi = MultiplicativeCharacter::from_generators(R->one(), 2, 4, {-R->one(), *i4});
  EXPECT_EQ(chi.conductor(), 4);
  std::mt19937_64 rng(36);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_padic(2, rng), b = random_padic(2, rng);
    ASSERT_EQ(chi(a * b), chi(a) * chi(b));
  }
}

TEST(Measures, IntegrateUnits) {
  auto R = Ring::make_ramified(3, 6, {1, 1, 1});
  const i64 p = 7;
  EXPECT_EQ(integrate_units([&](i64) { return R->one(); }, R, p, 1), R->from_int(6));
  for (int c = 1; c <= 3; ++c)
    EXPECT_TRUE(integrate_units([&](i64 u) { return u % p == 1 ? R->one() : R->zero(); }, R, p, c).is_one());
  auto chi3 = MultiplicativeCharacter::from_generators(R->one(), p, 1, {R->gen_t()});
  EXPECT_TRUE(integrate_units([&](i64 u) { return chi3.on_unit(u); }, R, p, 1).is_zero());
  // refinement invariance
  std::mt19937_64 rng(37);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Element> vals(49);
    for (auto& v : vals) v = R->random(rng);
    auto f = [&](i64 u) { return vals[static_cast<std::size_t>(u % 49)]; };
    ASSERT_EQ(integrate_units(f, R, p, 2), integrate_units(f, R, p, 3));
  }
  EXPECT_FALSE(unit_coset_mass(R, p, 0).is_unit());
  EXPECT_TRUE(unit_coset_mass(R, p, 2).is_unit());
}

TEST(Measures, GaussSums) {
  // mu_7 and mu_3 in W_3(F_169)
  auto R = Ring::make_unramified(13, 3, 2);
  const i64 p = 7;
  auto psi = AdditiveCharacter::make(R, p);
  auto w3 = primitive_root_of_unity(R, 3, 1);
  ASSERT_TRUE(w3);
  for (const Element& gen : {-R->one(), *w3}) {
    auto chi = MultiplicativeCharacter::from_generators(R->one(), p, 1, {gen});
    const Element g = gauss_sum(chi, psi);
    const Element chim1 = chi.on_unit(-1);
    EXPECT_EQ(g * gauss_sum(chi.inverse(), psi), chim1 * R->from_int(p));
    EXPECT_EQ(g * gauss_sum(chi.inverse(), psi.scaled(-1)), R->from_int(p));
    for (i64 b = 1; b < p; ++b) EXPECT_EQ(gauss_sum(chi, psi.scaled(b)), *chi.on_unit(b).inverse() * g);
  }
  EXPECT_THROW(gauss_sum(MultiplicativeCharacter::unramified(R->one(), p), psi), ContractError);
}
