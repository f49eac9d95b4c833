// A two-point family over fiber(O_E, O_E), O_E = Z[t]/(3^6, t^2+t+1):
// spherical(2, 1+t) and its twist by the order-3 tame character of Q_7^x.
// The family gamma factor specializes to both points.

#include <iostream>

#include "ellgamma/families.hpp"

using namespace ellgamma;

int main() {
  const RingPtr E = cyclotomic_ring(3, 6, 6);
  const PointData pi{{E->from_int(2), E->one() + E->gen_t()}, std::nullopt};
  PointData pi2 = pi;
  pi2.twist = MultiplicativeCharacter::from_generators(E->one(), 7, 1, {E->gen_t()});

  const FamilyDescriptor F = FamilyDescriptor::glue(pi, pi2);
  std::cout << "family ring  " << F.ring->descriptor() << '\n';

  const SpecializationReport rep = specialize_gamma(F, 7);
  std::cout << "gamma_A      " << rep.family.gamma.pretty() << '\n';
  for (int i = 0; i < 2; ++i)
    std::cout << "point " << i + 1 << "      " << rep.points[i].gamma.pretty() << (rep.match[i] ? "  (= f_i gamma_A)" : "  MISMATCH") << '\n';
  std::cout << "residues     " << (rep.residue_consistent ? "consistent" : "inconsistent") << '\n';

  const CongruenceReport cong = congruence_check(pi, pi2, 7);
  std::cout << "mod m_E      " << cong.gamma_a_bar.pretty() << (cong.congruent() ? "  congruent" : "  not congruent") << '\n';
}
