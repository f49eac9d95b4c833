#pragma once

// Q_p at finite relative precision, matrices over it with the Iwasawa
// decomposition g = n t k, and the characters and Haar measures of Q_p
// valued in a coefficient ring.

#include <atomic>
#include <climits>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellgamma/rings.hpp"

namespace ellgamma {

inline constexpr int kDefaultPAdicPrecision = 12;

inline i64 ipow(i64 b, int e) {
  i64 r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// p^v * u with u a unit known modulo p^r.  Zero is either exact or known
/// only to lie in p^v Z_p (an inexact zero left by cancellation).
// Twelve digits, except for small primes where twelve digits are too few
// bits to survive elimination; those get p^r <= 2^40.
inline std::atomic<int>& precision_override() {
  static std::atomic<int> r{0};
  return r;
}

/// Set the relative precision used by every PAdic built with prec = 0
/// (0 restores the prime-dependent default).  Meant to be called once,
/// before any computation.
inline void set_default_precision(int r) { precision_override().store(r); }

inline int default_precision(i64 p) {
  if (const int r = precision_override().load(std::memory_order_relaxed); r > 0) return r;
  if (p >= 7) return kDefaultPAdicPrecision;
  int r = kDefaultPAdicPrecision;
  while (ipow(p, r + 1) <= (i64{1} << 40)) ++r;
  return r;
}

class PAdic {
 public:
  static constexpr int kInf = INT_MAX / 4;

  PAdic() = default;
  PAdic(i64 p, i64 value, int prec = 0) : p_(p) {
    if (prec <= 0) prec = default_precision(p);
    if (value == 0) {
      zero_ = true;
      v_ = kInf;
      return;
    }
    int v = 0;
    while (value % p == 0) {
      value /= p;
      ++v;
    }
    set(v, value, prec);
  }
  static PAdic zero(i64 p) { return PAdic(p, 0); }
  static PAdic p_power(i64 p, int k, int prec = 0) {
    PAdic x(p, 1, prec);
    x.v_ = k;
    return x;
  }
  /// num / den for integers (den != 0).
  static PAdic fraction(i64 p, i64 num, i64 den, int prec = 0) {
    if (den == 0) throw ContractError("p-adic fraction with zero denominator");
    return PAdic(p, num, prec) * PAdic(p, den, prec).inverse();
  }
  /// p^v * unit with the unit given modulo p^r.
  static PAdic make(i64 p, int v, i64 unit, int r) {
    PAdic x;
    x.p_ = p;
    if (unit % p == 0) throw ContractError("unit part divisible by p");
    x.set(v, unit, r);
    return x;
  }

  i64 prime() const { return p_; }
  bool is_zero() const { return zero_; }
  bool is_exact_zero() const { return zero_ && v_ >= kInf; }
  /// Valuation; an inexact zero has no known valuation.
  int valuation() const {
    if (zero_) {
      if (v_ >= kInf) return kInf;
      throw PrecisionError("valuation of a p-adic number lost to cancellation");
    }
    return v_;
  }
  /// Every element of p^bound Z_p is consistent with this value.
  int valuation_lower_bound() const { return v_; }
  int relative_precision() const { return r_; }
  /// Unit part modulo p^k.
  i64 unit_mod(int k) const {
    if (zero_) throw ContractError("unit part of zero");
    if (k > r_) throw PrecisionError("unit part needed to " + std::to_string(k) + " digits, only " +
                                     std::to_string(r_) + " known");
    return u_ % ipow(p_, k);
  }
  i64 unit() const { return u_; }

  PAdic operator-() const {
    if (zero_) return *this;
    PAdic x = *this;
    x.u_ = mod() - u_;
    return x;
  }
  PAdic operator+(const PAdic& o) const {
    check(o);
    if (is_exact_zero()) return o;
    if (o.is_exact_zero()) return *this;
    const int A = std::min(abs_prec(), o.abs_prec());
    if (zero_ || o.zero_) {
      const PAdic& nz = zero_ ? o : *this;
      if (nz.zero_ || nz.v_ >= A) return inexact_zero(A);
      return nz.truncated(A - nz.v_);
    }
    const PAdic& a = v_ <= o.v_ ? *this : o;
    const PAdic& b = v_ <= o.v_ ? o : *this;
    const int rr = A - a.v_;
    if (rr <= 0) return inexact_zero(A);
    const i64 M = ipow(p_, rr);
    const int d = b.v_ - a.v_;
    if (d >= rr) return a.truncated(rr);
    i64 s = (a.u_ % M + detail::mul_mod(ipow(p_, d), b.u_ % M, M)) % M;
    if (s == 0) return inexact_zero(A);
    int e = 0;
    while (s % p_ == 0) {
      s /= p_;
      ++e;
    }
    PAdic out;
    out.p_ = p_;
    out.set(a.v_ + e, s, rr - e);
    return out;
  }
  PAdic operator-(const PAdic& o) const { return *this + (-o); }
  PAdic operator*(const PAdic& o) const {
    check(o);
    if (is_exact_zero() || o.is_exact_zero()) return zero(p_);
    if (zero_ || o.zero_) return inexact_zero(v_ + o.v_);
    PAdic out;
    out.p_ = p_;
    const int r = std::min(r_, o.r_);
    const i64 M = ipow(p_, r);
    out.set(v_ + o.v_, detail::mul_mod(u_ % M, o.u_ % M, M), r);
    return out;
  }
  PAdic inverse() const {
    if (zero_) throw ContractError("inverse of zero in Q_p");
    PAdic out;
    out.p_ = p_;
    out.set(-v_, detail::inv_mod(u_, mod()), r_);
    return out;
  }
  PAdic operator/(const PAdic& o) const { return *this * o.inverse(); }
  PAdic shifted(int k) const {
    PAdic x = *this;
    if (!is_exact_zero()) x.v_ += k;
    return x;
  }

  /// Equal at the common precision.
  friend bool operator==(const PAdic& a, const PAdic& b) { return (a - b).is_zero(); }
  friend bool operator!=(const PAdic& a, const PAdic& b) { return !(a == b); }

  std::string str() const {
    std::ostringstream os;
    if (is_exact_zero()) return "0";
    if (zero_) {
      os << "O(" << p_ << "^" << v_ << ")";
      return os.str();
    }
    i64 u = u_;
    const i64 M = mod();
    if (u > M / 2) u -= M;
    os << u;
    if (v_ != 0) os << "*" << p_ << "^" << v_;
    return os.str();
  }

 private:
  i64 p_ = 0;
  bool zero_ = false;
  int v_ = 0;
  i64 u_ = 0;
  int r_ = 0;

  i64 mod() const { return ipow(p_, r_); }
  int abs_prec() const { return zero_ ? v_ : v_ + r_; }
  void set(int v, i64 unit, int r) {
    zero_ = false;
    v_ = v;
    r_ = r;
    u_ = detail::norm_mod(unit, ipow(p_, r));
  }
  PAdic inexact_zero(int bound) const {
    PAdic z;
    z.p_ = p_;
    z.zero_ = true;
    z.v_ = bound;
    return z;
  }
  PAdic truncated(int r) const {
    PAdic x = *this;
    if (r < x.r_) {
      x.r_ = r;
      x.u_ %= ipow(p_, r);
    }
    return x;
  }
  void check(const PAdic& o) const {
    if (p_ != o.p_) throw ContractError("p-adic numbers for different primes");
  }
};

class PAdicMatrix {
 public:
  PAdicMatrix() = default;
  PAdicMatrix(i64 p, int n) : p_(p), n_(n), a_(static_cast<std::size_t>(n * n), PAdic::zero(p)) {}

  static PAdicMatrix identity(i64 p, int n) {
    PAdicMatrix m(p, n);
    for (int i = 0; i < n; ++i) m(i, i) = PAdic(p, 1);
    return m;
  }
  static PAdicMatrix diag(const std::vector<PAdic>& d) {
    PAdicMatrix m(d.at(0).prime(), static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m(i, i) = d[i];
    return m;
  }
  /// diag(p^k_1, ..., p^k_n)
  static PAdicMatrix torus(i64 p, const std::vector<int>& k) {
    std::vector<PAdic> d;
    for (int e : k) d.push_back(PAdic::p_power(p, e));
    return diag(d);
  }
  /// I + x E_ij
  static PAdicMatrix elementary(int n, int i, int j, const PAdic& x) {
    PAdicMatrix m = identity(x.prime(), n);
    m(i, j) = m(i, j) + x;
    return m;
  }
  static PAdicMatrix from_ints(i64 p, const std::vector<std::vector<i64>>& rows) {
    PAdicMatrix m(p, static_cast<int>(rows.size()));
    for (int i = 0; i < m.n_; ++i)
      for (int j = 0; j < m.n_; ++j) m(i, j) = PAdic(p, rows[i][j]);
    return m;
  }
  /// Antidiagonal with entries (-1)^(i-1) in row i.
  static PAdicMatrix w(i64 p, int n) {
    PAdicMatrix m(p, n);
    for (int i = 0; i < n; ++i) m(i, n - 1 - i) = PAdic(p, i % 2 ? -1 : 1);
    return m;
  }
  /// (-1)^n in the corner and the signed antidiagonal of size n-1 below it
  /// (the identity for n = 2).
  static PAdicMatrix w_prime(i64 p, int n) {
    if (n == 2) return identity(p, 2);
    PAdicMatrix m(p, n);
    m(0, 0) = PAdic(p, n % 2 ? -1 : 1);
    for (int i = 0; i < n - 1; ++i) m(1 + i, n - 1 - i) = PAdic(p, i % 2 ? 1 : -1);
    return m;
  }

  int n() const { return n_; }
  i64 prime() const { return p_; }
  PAdic& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  const PAdic& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }

  PAdicMatrix operator*(const PAdicMatrix& o) const {
    if (n_ != o.n_) throw ContractError("matrix size mismatch");
    PAdicMatrix m(p_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        PAdic acc = PAdic::zero(p_);
        for (int k = 0; k < n_; ++k)
          if (!(*this)(i, k).is_exact_zero() && !o(k, j).is_exact_zero()) acc = acc + (*this)(i, k) * o(k, j);
        m(i, j) = acc;
      }
    return m;
  }
  PAdicMatrix transpose() const {
    PAdicMatrix m(p_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(j, i);
    return m;
  }
  /// Gauss-Jordan with minimal-valuation pivots.
  PAdicMatrix inverse() const {
    PAdicMatrix a = *this, b = identity(p_, n_);
    for (int col = 0; col < n_; ++col) {
      int piv = -1, best = PAdic::kInf;
      for (int r = col; r < n_; ++r)
        if (!a(r, col).is_zero() && a(r, col).valuation() < best) {
          best = a(r, col).valuation();
          piv = r;
        }
      if (piv < 0) throw PrecisionError("matrix is singular at working precision");
      for (int j = 0; j < n_; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(b(col, j), b(piv, j));
      }
      const PAdic inv = a(col, col).inverse();
      for (int j = 0; j < n_; ++j) {
        a(col, j) = a(col, j) * inv;
        b(col, j) = b(col, j) * inv;
      }
      for (int r = 0; r < n_; ++r) {
        if (r == col || a(r, col).is_exact_zero()) continue;
        const PAdic f = a(r, col);
        for (int j = 0; j < n_; ++j) {
          a(r, j) = a(r, j) - f * a(col, j);
          b(r, j) = b(r, j) - f * b(col, j);
        }
      }
    }
    return b;
  }
  /// g^iota, the inverse transpose.
  PAdicMatrix iota() const { return inverse().transpose(); }

  PAdic det() const {
    PAdicMatrix a = *this;
    PAdic d(p_, 1);
    for (int col = 0; col < n_; ++col) {
      int piv = -1, best = PAdic::kInf;
      for (int r = col; r < n_; ++r)
        if (!a(r, col).is_zero() && a(r, col).valuation() < best) {
          best = a(r, col).valuation();
          piv = r;
        }
      if (piv < 0) return PAdic::zero(p_);
      if (piv != col) {
        for (int j = 0; j < n_; ++j) std::swap(a(col, j), a(piv, j));
        d = -d;
      }
      d = d * a(col, col);
      const PAdic inv = a(col, col).inverse();
      for (int r = col + 1; r < n_; ++r) {
        if (a(r, col).is_exact_zero()) continue;
        const PAdic f = a(r, col) * inv;
        for (int j = col; j < n_; ++j) a(r, j) = a(r, j) - f * a(col, j);
      }
    }
    return d;
  }

  bool is_integral() const {
    for (const auto& x : a_)
      if (!x.is_zero() && x.valuation() < 0) return false;
    return true;
  }
  bool is_upper_unipotent() const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j <= i; ++j) {
        const PAdic& x = (*this)(i, j);
        if (i == j ? x != PAdic(p_, 1) : !x.is_zero()) return false;
      }
    return true;
  }

  friend bool operator==(const PAdicMatrix& a, const PAdicMatrix& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t k = 0; k < a.a_.size(); ++k)
      if (a.a_[k] != b.a_[k]) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < n_; ++i) {
      os << (i ? "; " : "");
      for (int j = 0; j < n_; ++j) os << (j ? " " : "") << (*this)(i, j).str();
    }
    os << ']';
    return os.str();
  }

 private:
  i64 p_ = 0;
  int n_ = 0;
  std::vector<PAdic> a_;
};

struct Iwasawa {
  PAdicMatrix n, t, k;
};

/// g = n t k with n upper unipotent, t diagonal and k in GL_n(Z_p), by column
/// reduction from the bottom row up, pivoting on minimal valuation.
inline Iwasawa iwasawa_decompose(const PAdicMatrix& g) {
  const int n = g.n();
  const i64 p = g.prime();
  PAdicMatrix b = g, k = PAdicMatrix::identity(p, n);
  for (int row = n - 1; row >= 0; --row) {
    int piv = -1, best = PAdic::kInf;
    for (int c = 0; c <= row; ++c)
      if (!b(row, c).is_zero() && b(row, c).valuation() < best) {
        best = b(row, c).valuation();
        piv = c;
      }
    if (piv < 0) throw PrecisionError("iwasawa_decompose: matrix singular at working precision");
    if (piv != row) {
      for (int r = 0; r < n; ++r) std::swap(b(r, piv), b(r, row));
      for (int c = 0; c < n; ++c) std::swap(k(piv, c), k(row, c));
    }
    const PAdic inv = b(row, row).inverse();
    for (int c = 0; c < row; ++c) {
      if (b(row, c).is_exact_zero()) continue;
      const PAdic f = b(row, c) * inv;  // integral by the pivot choice
      for (int r = 0; r < n; ++r) b(r, c) = b(r, c) - f * b(r, row);
      b(row, c) = PAdic::zero(p);
      for (int cc = 0; cc < n; ++cc) k(row, cc) = k(row, cc) + f * k(c, cc);
    }
  }
  // t keeps only the p-powers; the unit parts move into k
  Iwasawa out{PAdicMatrix::identity(p, n), PAdicMatrix(p, n), k};
  for (int i = 0; i < n; ++i) {
    const PAdic& d = b(i, i);
    out.t(i, i) = PAdic::p_power(p, d.valuation());
    const PAdic unit = PAdic::make(p, 0, d.unit(), d.relative_precision());
    for (int c = 0; c < n; ++c) out.k(i, c) = unit * k(i, c);
    for (int j = i + 1; j < n; ++j) out.n(i, j) = b(i, j) * b(j, j).inverse();
  }
  return out;
}

namespace detail {

/// Primitive p^D-th root of unity in a local, fiber-product or product ring.
inline std::optional<Element> root_of_unity(const RingPtr& R, i64 p, int D) {
  switch (R->kind()) {
    case Ring::Kind::Local:
      return primitive_root_of_unity(R, p, D);
    case Ring::Kind::Fiber: {
      auto z0 = root_of_unity(R->components()[0], p, D);
      if (!z0) return std::nullopt;
      const Element r = z0->residue();
      const RingPtr& C1 = R->components()[1];
      auto z1 = teichmuller(C1->from_coords(r.coords()));
      return R->from_parts({*z0, z1});
    }
    case Ring::Kind::Product: {
      std::vector<Element> parts;
      for (const auto& C : R->components()) {
        auto z = root_of_unity(C, p, D);
        if (!z) return std::nullopt;
        parts.push_back(*z);
      }
      return R->from_parts(std::move(parts));
    }
  }
  return std::nullopt;
}

/// Largest D <= cap with p^D | ell^f - 1 for every local factor.
inline int available_root_depth(const RingPtr& R, i64 p, int cap) {
  if (R->kind() == Ring::Kind::Product) {
    int d = cap;
    for (const auto& C : R->components()) d = std::min(d, available_root_depth(C, p, cap));
    return d;
  }
  const u128 q1 = R->residue_cardinality() - 1;
  int d = 0;
  u128 pk = static_cast<u128>(p);
  while (d < cap && q1 % pk == 0) {
    ++d;
    pk *= static_cast<u128>(p);
  }
  return d;
}

inline i64 primitive_root_mod(i64 p, int a) {
  for (i64 g = 2; g < p; ++g) {
    bool ok = true;
    for (int r : prime_factors(static_cast<int>(p - 1)))
      if (pow_mod(g, static_cast<u128>((p - 1) / r), p) == 1) ok = false;
    if (!ok) continue;
    if (a >= 2 && pow_mod(g, static_cast<u128>(p - 1), p * p) == 1) g += p;
    return g;
  }
  return 1;  // p = 2 or 3 handled by callers; for p = 3 the loop returns 2
}

}  // namespace detail

/// psi(x) = zeta^(class of x), trivial exactly on p^c Z_p; zeta is a
/// primitive p^D-th root of unity in the coefficient ring.
class AdditiveCharacter {
 public:
  static AdditiveCharacter make(const RingPtr& R, i64 p, int c = 1, std::optional<int> depth = std::nullopt) {
    AdditiveCharacter psi;
    psi.R_ = R;
    psi.p_ = p;
    psi.c_ = c;
    psi.D_ = depth ? *depth : detail::available_root_depth(R, p, 8);
    auto z = detail::root_of_unity(R, p, psi.D_);
    if (!z) throw MissingRootsError("coefficient ring lacks mu_" + std::to_string(ipow(p, psi.D_)), psi.D_);
    psi.fill(*z);
    return psi;
  }

  const RingPtr& ring() const { return R_; }
  i64 p() const { return p_; }
  int kernel_exponent() const { return c_; }
  int depth() const { return D_; }
  const Element& zeta() const { return pow_[D_ > 0 ? 1 : 0]; }

  Element operator()(const PAdic& x) const {
    const PAdic y = scale_ == 1 ? x : x * PAdic(p_, scale_);
    if (y.is_zero()) {
      if (y.valuation_lower_bound() >= c_) return R_->one();
      throw PrecisionError("psi of a value lost to cancellation");
    }
    const int v = y.valuation();
    if (v >= c_) return R_->one();
    const int k = c_ - v;
    if (k > D_)
      throw MissingRootsError("psi needs mu_" + std::to_string(p_) + "^" + std::to_string(k) +
                                  "; enlarge the ring with required_cyclotomic_extension",
                              k);
    const i64 cls = y.unit_mod(k) * ipow(p_, D_ - k);
    return pow_[static_cast<std::size_t>(cls)];
  }

  /// x -> psi(b x) for an integer unit b.
  AdditiveCharacter scaled(i64 b) const {
    if (b % p_ == 0) throw ContractError("psi scaling must be a unit");
    AdditiveCharacter out = *this;
    out.scale_ = detail::norm_mod(scale_ * b, ipow(p_, default_precision(p_)));
    return out;
  }

  AdditiveCharacter base_change(const RingMap& phi) const {
    AdditiveCharacter out = *this;
    out.R_ = phi.target();
    for (auto& z : out.pow_) z = phi(z);
    return out;
  }

  std::string str() const {
    return "(c=" + std::to_string(c_) + ", zeta=" + zeta().str() + " of order " + std::to_string(p_) + "^" +
           std::to_string(D_) + (scale_ != 1 ? ", scale=" + std::to_string(scale_) : "") + ")";
  }

 private:
  RingPtr R_;
  i64 p_ = 0;
  int c_ = 1;
  int D_ = 0;
  i64 scale_ = 1;
  std::vector<Element> pow_;

  void fill(const Element& z) {
    const i64 order = ipow(p_, D_);
    pow_.clear();
    Element acc = R_->one();
    for (i64 k = 0; k < order; ++k) {
      pow_.push_back(acc);
      acc *= z;
    }
    if (!acc.is_one()) throw VerificationError("root of unity has the wrong order");
  }
};

/// chi(x) = chi(p)^v(x) * table[unit part mod p^a].
class MultiplicativeCharacter {
 public:
  static MultiplicativeCharacter unramified(const Element& chi_pi, i64 p) {
    if (!chi_pi.is_unit()) throw ContractError("chi(p) must be a unit");
    MultiplicativeCharacter c;
    c.R_ = chi_pi.ring();
    c.p_ = p;
    c.pi_ = chi_pi;
    c.a_ = 0;
    c.table_ = {c.R_->one()};
    return c;
  }

  /// Character of conductor a >= 1 given by its values on generators of
  /// (Z/p^a)^x: a primitive root for odd p, and (-1, 5) for p = 2.
  static MultiplicativeCharacter from_generators(const Element& chi_pi, i64 p, int a,
                                                 const std::vector<Element>& gens) {
    MultiplicativeCharacter c = unramified(chi_pi, p);
    if (a == 0) {
      if (!gens.empty()) throw ContractError("unramified character takes no generator values");
      return c;
    }
    const RingPtr& R = c.R_;
    const i64 M = ipow(p, a);
    c.a_ = a;
    c.table_.assign(static_cast<std::size_t>(M), R->zero());
    if (p != 2) {
      if (gens.size() != 1) throw ContractError("odd p needs one generator value");
      const i64 g = detail::primitive_root_mod(p, a);
      const i64 order = ipow(p, a - 1) * (p - 1);
      if (!gens[0].pow(static_cast<u128>(order)).is_one())
        throw ContractError("generator value has order not dividing " + std::to_string(order));
      i64 u = 1;
      Element val = R->one();
      for (i64 k = 0; k < order; ++k) {
        c.table_[static_cast<std::size_t>(u)] = val;
        u = u * g % M;
        val *= gens[0];
      }
    } else {
      if (a < 2) throw ContractError("for p = 2 the conductor of a ramified character is at least 2");
      const std::size_t want = a == 2 ? 1 : 2;
      if (gens.size() != want) throw ContractError("p = 2 needs values at -1 and 5");
      if (!(gens[0] * gens[0]).is_one()) throw ContractError("chi(-1)^2 must be 1");
      const i64 order5 = a == 2 ? 1 : ipow(2, a - 2);
      const Element v5 = a == 2 ? R->one() : gens[1];
      if (!v5.pow(static_cast<u128>(order5)).is_one()) throw ContractError("chi(5) has the wrong order");
      for (int s = 0; s < 2; ++s) {
        i64 u = s ? M - 1 : 1;
        Element val = s ? gens[0] : R->one();
        for (i64 k = 0; k < order5; ++k) {
          c.table_[static_cast<std::size_t>(u)] = val;
          u = u * 5 % M;
          val *= v5;
        }
      }
    }
    // exact conductor: nontrivial on 1 + p^(a-1) Z_p
    bool nontrivial = false;
    const i64 step = ipow(p, a - 1);
    for (i64 u = 1; u < M; u += step)
      if (u % p != 0 && !c.table_[static_cast<std::size_t>(u)].is_one()) nontrivial = true;
    if (!nontrivial) throw ContractError("character is trivial on U^(" + std::to_string(a - 1) + "); conductor below " + std::to_string(a));
    return c;
  }

  const RingPtr& ring() const { return R_; }
  i64 p() const { return p_; }
  int conductor() const { return a_; }
  bool ramified() const { return a_ > 0; }
  const Element& value_at_pi() const { return pi_; }

  Element on_unit(i64 u) const {
    if (detail::norm_mod(u, p_) == 0) throw ContractError("chi on a non-unit residue");
    return table_[static_cast<std::size_t>(detail::norm_mod(u, ipow(p_, a_)))];
  }
  Element operator()(const PAdic& x) const {
    if (x.is_zero()) throw ContractError("chi(0)");
    return pi_.pow_signed(x.valuation()) * (a_ == 0 ? R_->one() : on_unit(x.unit_mod(a_)));
  }

  MultiplicativeCharacter inverse() const {
    MultiplicativeCharacter c = *this;
    c.pi_ = *pi_.inverse();
    for (auto& t : c.table_)
      if (!t.is_zero()) t = *t.inverse();
    return c;
  }
  MultiplicativeCharacter operator*(const MultiplicativeCharacter& o) const {
    if (p_ != o.p_) throw ContractError("characters for different primes");
    const int a = std::max(a_, o.a_);
    const i64 M = ipow(p_, a);
    MultiplicativeCharacter c = *this;
    c.pi_ = pi_ * o.pi_;
    c.a_ = a;
    c.table_.assign(static_cast<std::size_t>(M), R_->zero());
    for (i64 u = 1; u < M; ++u)
      if (u % p_) c.table_[static_cast<std::size_t>(u)] = on_unit(u) * o.on_unit(u);
    c.shrink();
    return c;
  }
  MultiplicativeCharacter base_change(const RingMap& phi) const {
    MultiplicativeCharacter c = *this;
    c.R_ = phi.target();
    c.pi_ = phi(pi_);
    for (auto& t : c.table_) t = phi(t);
    return c;
  }

  /// (chi_pi, conductor, table)
  std::string str() const {
    std::ostringstream os;
    os << '(' << pi_.str() << ", " << a_ << ", [";
    for (std::size_t i = 0; i < table_.size(); ++i)
      if (i % p_) os << (i > 1 ? " " : "") << i << ':' << table_[i].str();
    os << "])";
    return os.str();
  }

 private:
  RingPtr R_;
  i64 p_ = 0;
  Element pi_;
  int a_ = 0;
  std::vector<Element> table_;

  // lower the stored conductor while the character stays trivial on U^(a-1)
  void shrink() {
    while (a_ > 0) {
      const i64 step = ipow(p_, a_ - 1), M = ipow(p_, a_);
      bool trivial = true;
      for (i64 u = 1; u < M; u += step)
        if (u % p_ && !table_[static_cast<std::size_t>(u)].is_one()) trivial = false;
      if (!trivial) return;
      std::vector<Element> t(static_cast<std::size_t>(step), R_->zero());
      for (i64 u = 0; u < step; ++u)
        if (a_ == 1 ? u == 0 : u % p_ != 0) t[static_cast<std::size_t>(u)] = table_[static_cast<std::size_t>(a_ == 1 ? 1 : u)];
      table_ = std::move(t);
      --a_;
    }
  }
};

/// d^x a with mu^x(U^(1)) = 1: mass of each coset u U^(c) is p^(1-c), and
/// of U itself (c = 0) q - 1.
inline Element unit_coset_mass(const RingPtr& R, i64 p, int c) {
  if (c == 0) return R->from_int(p - 1);
  return R->from_int(ipow(p, c - 1)).inverse().value();
}

/// Sum over the (q-1) p^(c-1) cosets of U/U^(c) of f(u) * mass(u U^(c)).
inline Element integrate_units(const std::function<Element(i64)>& f, const RingPtr& R, i64 p, int c) {
  if (c < 1) throw ContractError("integrate_units needs resolution c >= 1");
  const i64 M = ipow(p, c);
  Element acc = R->zero();
  for (i64 u = 1; u < M; ++u)
    if (u % p) acc += f(u);
  return acc * unit_coset_mass(R, p, c);
}

/// dx with vol(O) a chosen ring element; vol(p^k O) = vol(O) p^-k.
struct AdditiveHaar {
  RingPtr ring;
  i64 p = 0;
  Element vol_O;

  static AdditiveHaar standard(const RingPtr& R, i64 p) { return {R, p, R->one()}; }
  Element volume(int k) const { return vol_O * R_pow(-k); }

 private:
  Element R_pow(int e) const { return ring->from_int(p).pow_signed(e); }
};

/// sum over u in (Z/p^a)^x of chi(u) psi(u p^(c-a)); well defined on classes
/// mod p^a because psi is trivial on p^c.
inline Element gauss_sum(const MultiplicativeCharacter& chi, const AdditiveCharacter& psi) {
  if (!chi.ramified()) throw ContractError("gauss_sum needs a ramified character");
  if (!same_ring(chi.ring(), psi.ring())) throw RingMismatch("gauss_sum: characters over different rings");
  const i64 p = chi.p();
  const int a = chi.conductor();
  const i64 M = ipow(p, a);
  Element acc = chi.ring()->zero();
  for (i64 u = 1; u < M; ++u)
    if (u % p) acc += chi.on_unit(u) * psi(PAdic(p, u).shifted(psi.kernel_exponent() - a));
  return acc;
}

}  // namespace ellgamma
