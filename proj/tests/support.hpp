#pragma once

#include <random>

#include "ellgamma/padic.hpp"

namespace testsupport {

using namespace ellgamma;

inline PAdic random_padic(i64 p, std::mt19937_64& rng, int vlo = -3, int vhi = 3) {
  std::uniform_int_distribution<i64> u(1, ipow(p, 8));
  std::uniform_int_distribution<int> v(vlo, vhi);
  i64 x = u(rng);
  while (x % p == 0) x = u(rng);
  return PAdic(p, x).shifted(v(rng));
}

// Product of elementary, torus and Weyl generators.  Valuation spreads stay
// small so products keep most of the 12 digits of relative precision.
inline PAdicMatrix random_gl(i64 p, int n, std::mt19937_64& rng) {
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

// Element of GL_n(Z_p): integral generators only.
inline PAdicMatrix random_k(i64 p, int n, std::mt19937_64& rng) {
  PAdicMatrix g = PAdicMatrix::identity(p, n);
  std::uniform_int_distribution<int> pick(0, 2), idx(0, n - 1);
  for (int s = 0; s < 6; ++s) {
    const int c = pick(rng);
    if (c == 0) {
      int i = idx(rng), j = idx(rng);
      if (i != j) g = g * PAdicMatrix::elementary(n, i, j, random_padic(p, rng, 0, 2));
    } else if (c == 1) {
      PAdicMatrix d = PAdicMatrix::identity(p, n);
      const int i = idx(rng);
      d(i, i) = random_padic(p, rng, 0, 0);
      g = g * d;
    } else {
      g = g * PAdicMatrix::w(p, n);
    }
  }
  return g;
}

inline PAdicMatrix random_upper_unipotent(i64 p, int n, std::mt19937_64& rng, int vlo = -1) {
  PAdicMatrix u = PAdicMatrix::identity(p, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) u(i, j) = random_padic(p, rng, vlo, 2);
  return u;
}

inline Element random_unit(const RingPtr& R, std::mt19937_64& rng) {
  Element x = R->random(rng);
  while (!x.is_unit()) x = R->random(rng);
  return x;
}

}  // namespace testsupport

namespace ellgamma {
inline void PrintTo(const Element& e, std::ostream* os) { *os << e.str(); }
inline void PrintTo(const PAdic& x, std::ostream* os) { *os << x.str(); }
}  // namespace ellgamma
