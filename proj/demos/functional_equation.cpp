// Gamma factor of an unramified principal series of GL_2(Q_2) over
// W(F_9)/3^6 = unram(3,6,2), checked against the default battery.

#include <iostream>

#include "ellgamma/zeta.hpp"

using namespace ellgamma;

int main() {
  const RingPtr R = Ring::make_unramified(3, 6, 2);
  const i64 p = 2;
  const AdditiveCharacter psi = AdditiveCharacter::make(R, p);

  const Element a = R->from_int(2);
  const Element b = R->one() + R->gen_s();
  const Whittaker W = Whittaker::spherical({a, b}, psi);

  std::cout << "Z(W)    " << zeta_integral(W, 0).value.pretty() << '\n';

  const GammaCertificate cert = gamma_factor(default_battery(W));
  std::cout << "gamma   " << cert.gamma.pretty() << '\n';
  std::cout << "pivot   " << cert.pivot << ", second " << cert.second_pivot.value_or("none") << '\n';
  for (const auto& e : cert.battery) std::cout << "  " << e.id << " j=" << e.j << (e.equal ? "  ok" : "  FAIL") << '\n';

  // a twist by an unramified character only rescales the Satake parameters
  const auto chi = MultiplicativeCharacter::unramified(R->from_int(-1), p);
  const GammaCertificate twisted = gamma_factor(default_battery(W.twist(chi)));
  const Element ma = -a, mb = -b;
  std::cout << "twist agrees with spherical(-a,-b): "
            << (twisted.gamma == gamma_factor(default_battery(Whittaker::spherical({ma, mb}, psi))).gamma) << '\n';
}
