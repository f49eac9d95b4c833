#pragma once

// Families of principal series glued over fiber products, and the checks that
// gamma factors specialize and respect congruences.  L-factors do not: the
// non-interpolation obstruction for GL_1 is built here as well.

#include "ellgamma/zeta.hpp"

namespace ellgamma {

/// Unramified principal series with Satake parameters `satake`, twisted by
/// chi(det) when `twist` is set.
struct PointData {
  std::vector<Element> satake;
  std::optional<MultiplicativeCharacter> twist;

  const RingPtr& ring() const { return satake.front().ring(); }
  int conductor() const { return twist ? twist->conductor() : 0; }

  Whittaker whittaker(const AdditiveCharacter& psi) const {
    Whittaker W = Whittaker::spherical(satake, psi);
    return twist ? W.twist(*twist) : W;
  }

  PointData base_change(const RingMap& phi) const {
    PointData out;
    for (const auto& a : satake) out.satake.push_back(phi(a));
    if (twist) out.twist = twist->base_change(phi);
    return out;
  }

  std::string str() const {
    std::string s = "spherical(";
    for (std::size_t i = 0; i < satake.size(); ++i) s += (i ? "," : "") + satake[i].str();
    s += ")";
    return twist ? "twist(" + s + ", chi" + twist->str() + ")" : s;
  }
};

namespace detail {

// values of chi at the generators used by MultiplicativeCharacter::from_generators
inline std::vector<Element> generator_values(const MultiplicativeCharacter& chi, int a) {
  const i64 p = chi.p();
  if (a == 0) return {};
  if (p != 2) return {chi.on_unit(primitive_root_mod(p, a))};
  if (a == 2) return {chi.on_unit(-1)};
  return {chi.on_unit(-1), chi.on_unit(5)};
}

inline MultiplicativeCharacter trivial_character(const RingPtr& R, i64 p) {
  return MultiplicativeCharacter::unramified(R->one(), p);
}

inline bool residues_agree(const Element& a, const Element& b) { return a.residue() == b.residue(); }

// chi and chi' agree mod m on p and on every unit class mod p^a
inline bool characters_congruent(const MultiplicativeCharacter& x, const MultiplicativeCharacter& y) {
  if (!residues_agree(x.value_at_pi(), y.value_at_pi())) return false;
  const int a = std::max(x.conductor(), y.conductor());
  const i64 M = ipow(x.p(), a);
  for (i64 u = 1; u < std::max<i64>(M, 2); ++u)
    if (u % x.p() && !residues_agree(x.on_unit(u), y.on_unit(u))) return false;
  return true;
}

}  // namespace detail

/// Defining data of two points congruent modulo the maximal ideal.
inline bool data_congruent(const PointData& a, const PointData& b) {
  if (a.satake.size() != b.satake.size()) return false;
  for (std::size_t i = 0; i < a.satake.size(); ++i)
    if (!detail::residues_agree(a.satake[i], b.satake[i])) return false;
  const i64 p = a.twist ? a.twist->p() : b.twist ? b.twist->p() : 0;
  if (!p) return true;
  const auto ta = a.twist ? *a.twist : detail::trivial_character(a.ring(), p);
  const auto tb = b.twist ? *b.twist : detail::trivial_character(b.ring(), p);
  return detail::characters_congruent(ta, tb);
}

struct FamilyDescriptor {
  RingPtr ring;
  PointData family;
  std::vector<RingMap> specializations;
  std::vector<PointData> points;

  /// The family over fiber(R_1, R_2) whose specializations are the two points.
  static FamilyDescriptor glue(const PointData& a, const PointData& b) {
    if (!data_congruent(a, b)) throw ContractError("point data are not congruent modulo the maximal ideal");
    FamilyDescriptor F;
    F.ring = Ring::make_fiber(a.ring(), b.ring());
    for (std::size_t i = 0; i < a.satake.size(); ++i)
      F.family.satake.push_back(F.ring->from_parts({a.satake[i], b.satake[i]}));
    if (a.twist || b.twist) {
      const i64 p = a.twist ? a.twist->p() : b.twist->p();
      const auto ta = a.twist ? *a.twist : detail::trivial_character(a.ring(), p);
      const auto tb = b.twist ? *b.twist : detail::trivial_character(b.ring(), p);
      const int c = std::max({ta.conductor(), tb.conductor(), p == 2 && (ta.ramified() || tb.ramified()) ? 2 : 0});
      const auto ga = detail::generator_values(ta, c), gb = detail::generator_values(tb, c);
      std::vector<Element> gens;
      for (std::size_t i = 0; i < ga.size(); ++i) gens.push_back(F.ring->from_parts({ga[i], gb[i]}));
      F.family.twist = MultiplicativeCharacter::from_generators(
          F.ring->from_parts({ta.value_at_pi(), tb.value_at_pi()}), p, c, gens);
    }
    F.specializations = {RingMap::projection(F.ring, 0), RingMap::projection(F.ring, 1)};
    F.points = {a, b};
    F.check();
    return F;
  }

  /// Each point is the image of the family data.
  void check() const {
    if (specializations.size() != points.size()) throw ContractError("one specialization per point");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const PointData img = family.base_change(specializations[i]);
      const PointData& pt = points[i];
      bool ok = img.satake == pt.satake;
      if (ok && (img.conductor() || pt.conductor())) {
        const i64 p = img.twist ? img.twist->p() : pt.twist->p();
        const auto x = img.twist ? *img.twist : detail::trivial_character(pt.ring(), p);
        const auto y = pt.twist ? *pt.twist : detail::trivial_character(pt.ring(), p);
        ok = x.value_at_pi() == y.value_at_pi();
        for (i64 u = 1; ok && u < ipow(p, std::max(x.conductor(), y.conductor())); ++u)
          if (u % p) ok = x.on_unit(u) == y.on_unit(u);
      }
      if (!ok) throw ContractError("point " + std::to_string(i + 1) + " is not the specialization of the family");
    }
  }

  int conductor() const {
    int c = family.conductor();
    for (const auto& pt : points) c = std::max(c, pt.conductor());
    return c;
  }
};

// ---------------------------------------------------------------------------
// Specialization

struct SpecializationReport {
  GammaCertificate family;
  std::vector<GammaCertificate> points;
  std::vector<bool> match;      // f_i(gamma_A) eq gamma_i
  bool residue_consistent = false;  // both routes to the residue field agree

  bool ok() const {
    if (!family.verified() || !residue_consistent) return false;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!points[i].verified() || !match[i]) return false;
    return true;
  }
};

/// gamma over the family ring against gamma at each point, all computed
/// independently; the runs execute concurrently.
inline SpecializationReport specialize_gamma(const FamilyDescriptor& F, i64 p, const ZetaOptions& opt = {}) {
  const int a = F.conductor();
  // each point uses the image of the family's psi
  const AdditiveCharacter psi = AdditiveCharacter::make(F.ring, p);
  auto run = [&](const PointData& d, const AdditiveCharacter& ps) {
    return gamma_factor(default_battery(d.whittaker(ps), a), opt);
  };
  std::vector<AdditiveCharacter> psis;
  for (const auto& f : F.specializations) psis.push_back(psi.base_change(f));
  std::vector<std::future<GammaCertificate>> fs;
  fs.push_back(std::async(std::launch::async, run, std::cref(F.family), std::cref(psi)));
  for (std::size_t i = 0; i < F.points.size(); ++i)
    fs.push_back(std::async(std::launch::async, run, std::cref(F.points[i]), std::cref(psis[i])));

  SpecializationReport rep{fs.front().get()};
  for (std::size_t i = 1; i < fs.size(); ++i) rep.points.push_back(fs[i].get());
  for (std::size_t i = 0; i < F.points.size(); ++i)
    rep.match.push_back(rep.family.gamma.map_coefficients(F.specializations[i]) == rep.points[i].gamma);
  rep.residue_consistent = true;
  std::optional<FractionS> first;
  for (const auto& f : F.specializations) {
    const FractionS g = rep.family.gamma.map_coefficients(RingMap::compose(RingMap::residue(f.target()), f));
    if (!first) first = g;
    else rep.residue_consistent = rep.residue_consistent && g == *first;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Congruences

struct CongruenceReport {
  GammaCertificate a, b;
  FractionS gamma_a_bar, gamma_b_bar;
  bool gamma_congruent = false;
  std::vector<std::pair<std::string, bool>> terms;  // battery entries, lhs and rhs reduced

  bool congruent() const {
    if (!gamma_congruent) return false;
    for (const auto& [id, ok] : terms)
      if (!ok) return false;
    return true;
  }
};

/// gamma(pi) = gamma(pi') mod m for congruent data over one local ring, with
/// the battery entries compared term by term.
inline CongruenceReport congruence_check(const PointData& pi, const PointData& pi2, i64 p, const ZetaOptions& opt = {}) {
  if (!same_ring(pi.ring(), pi2.ring())) throw RingMismatch("congruence_check needs data over one ring");
  if (!pi.ring()->is_local()) throw ContractError("congruence_check needs a local ring");
  if (!data_congruent(pi, pi2)) throw ContractError("defining data are not congruent modulo the maximal ideal");
  const AdditiveCharacter psi = AdditiveCharacter::make(pi.ring(), p);
  const int c = std::max(pi.conductor(), pi2.conductor());
  auto fa = std::async(std::launch::async, [&] { return gamma_factor(default_battery(pi.whittaker(psi), c), opt); });
  GammaCertificate gb = gamma_factor(default_battery(pi2.whittaker(psi), c), opt);
  GammaCertificate ga = fa.get();

  const RingMap red = RingMap::residue(pi.ring());
  CongruenceReport rep{ga, gb, ga.gamma.map_coefficients(red), gb.gamma.map_coefficients(red)};
  rep.gamma_congruent = rep.gamma_a_bar == rep.gamma_b_bar;
  for (std::size_t i = 0; i < ga.battery.size(); ++i) {
    const auto& x = ga.battery[i];
    const auto& y = gb.battery[i];
    rep.terms.push_back({x.id + (x.j ? " j=1" : ""), x.id == y.id && x.lhs.map_coefficients(red) == y.lhs.map_coefficients(red) &&
                                                     x.rhs.map_coefficients(red) == y.rhs.map_coefficients(red)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Non-interpolation of L-factors

struct Obstruction {
  RingPtr ring;
  MultiplicativeCharacter chi1, chi2;
  FractionS L1, L2;          // over O_E
  FractionS L1_bar, L2_bar;  // over the residue field
  int degree = 0;            // first X-power where the reductions differ
  Element lhs, rhs;          // the differing residue coefficients
};

/// O_E = Z_l[t]/(1 + t + ... + t^(l-1)) at precision N.
inline RingPtr cyclotomic_ring(i64 ell, int N = 6, int f = 1) {
  return Ring::make_ramified(ell, N, std::vector<i64>(static_cast<std::size_t>(ell), 1), f);
}

/// chi1 unramified and chi2 tame of order l with chi1(p) = chi2(p) = c.  They
/// are congruent mod m_E, yet L(chi1, X) and L(chi2, X) = 1 reduce to
/// different series.
inline Obstruction nointerp_demo(i64 ell, i64 p, std::optional<Element> c = std::nullopt, int N = 6) {
  if ((p - 1) % ell != 0)
    throw ContractError("no tame character of order " + std::to_string(ell) + " exists: " + std::to_string(ell) +
                        " does not divide p - 1 = " + std::to_string(p - 1));
  const RingPtr R = c ? c->ring() : cyclotomic_ring(ell, N);
  const Element cv = c ? *c : R->one();
  if (!cv.is_unit()) throw ContractError("chi(p) must be a unit");
  const Element t = R->gen_t();
  if (!t.pow(static_cast<u128>(ell)).is_one() || t.is_one())
    throw ContractError("the ring's generator t must be a primitive l-th root of unity");

  const auto chi1 = MultiplicativeCharacter::unramified(cv, p);
  const auto chi2 = MultiplicativeCharacter::from_generators(cv, p, 1, {t});
  const RingMap red = RingMap::residue(R);
  const FractionS L1 = l_factor_gl1(chi1), L2 = l_factor_gl1(chi2);
  Obstruction ob{R, chi1, chi2, L1, L2, L1.map_coefficients(red), L2.map_coefficients(red)};
  const auto s1 = ob.L1_bar.expand(0, 8), s2 = ob.L2_bar.expand(0, 8);
  for (int k = 0; k <= 8; ++k)
    if (!(s1[k] == s2[k])) {
      ob.degree = k;
      ob.lhs = s1[k];
      ob.rhs = s2[k];
      return ob;
    }
  throw VerificationError("reductions of the two L-factors agree through X^8");
}

}  // namespace ellgamma
