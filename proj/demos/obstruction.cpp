// The two characters of Q_7^x with values in Z[t]/(3^6, t^2+t+1): chi1 is
// unramified with chi1(7) = c, chi2 = chi1 times an order-3 tame character.
// They agree mod (1 - t), yet their L-factors do not.

#include <iostream>

#include "ellgamma/families.hpp"

using namespace ellgamma;

int main() {
  const Obstruction ob = nointerp_demo(3, 7);
  std::cout << "ring      " << ob.ring->descriptor() << '\n';
  std::cout << "L(chi1)   " << ob.L1.pretty() << '\n';
  std::cout << "L(chi2)   " << ob.L2.pretty() << '\n';
  // Output:
  // L(chi1)   1/(1-X)
  // L(chi2)   1

  // the residues of the two expansions first differ here
  std::cout << "degree    " << ob.degree << '\n';
  std::cout << "mod m     " << ob.lhs.str() << " vs " << ob.rhs.str() << '\n';
  // Output:
  // degree    1
  // mod m     [1] vs [0]
}
