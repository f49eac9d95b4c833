#pragma once

// A[X, X^-1], Laurent series windows, and the fraction ring S^-1 A[X, X^-1]
// where S is the set of Laurent polynomials whose first and last
// coefficients are units.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellgamma/rings.hpp"

namespace ellgamma {

class LaurentPoly {
 public:
  explicit LaurentPoly(RingPtr R) : ring_(std::move(R)) {}
  LaurentPoly(RingPtr R, int low, std::vector<Element> coeffs)
      : ring_(std::move(R)), low_(low), c_(std::move(coeffs)) {
    for (const auto& x : c_)
      if (!same_ring(x.ring(), ring_)) throw RingMismatch("Laurent coefficient from " + x.ring()->descriptor());
    trim();
  }
  static LaurentPoly monomial(const Element& c, int k) { return LaurentPoly(c.ring(), k, {c}); }
  static LaurentPoly constant(const Element& c) { return monomial(c, 0); }
  /// 1 - a_1 X - ... - a_r X^r
  static LaurentPoly one_minus(const RingPtr& R, const std::vector<Element>& a) {
    std::vector<Element> c{R->one()};
    for (const auto& x : a) c.push_back(-x);
    return LaurentPoly(R, 0, std::move(c));
  }

  const RingPtr& ring() const { return ring_; }
  bool is_zero() const { return c_.empty(); }
  int low() const { return low_; }
  int high() const { return low_ + static_cast<int>(c_.size()) - 1; }
  const std::vector<Element>& coeffs() const { return c_; }
  Element coeff(int k) const {
    if (k < low_ || k > high()) return ring_->zero();
    return c_[k - low_];
  }
  const Element& first() const { return c_.front(); }
  const Element& last() const { return c_.back(); }

  LaurentPoly operator+(const LaurentPoly& o) const { return combine(o, false); }
  LaurentPoly operator-(const LaurentPoly& o) const { return combine(o, true); }
  LaurentPoly operator-() const {
    std::vector<Element> r;
    for (const auto& x : c_) r.push_back(-x);
    return LaurentPoly(ring_, low_, std::move(r));
  }
  LaurentPoly operator*(const LaurentPoly& o) const {
    check(o);
    if (is_zero() || o.is_zero()) return LaurentPoly(ring_);
    std::vector<Element> r(c_.size() + o.c_.size() - 1, ring_->zero());
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i].is_zero()) continue;
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    }
    return LaurentPoly(ring_, low_ + o.low_, std::move(r));
  }
  LaurentPoly scaled(const Element& a) const {
    std::vector<Element> r;
    for (const auto& x : c_) r.push_back(x * a);
    return LaurentPoly(ring_, low_, std::move(r));
  }
  LaurentPoly shifted(int k) const {
    LaurentPoly r = *this;
    r.low_ += k;
    return r;
  }
  LaurentPoly pow(int k) const {
    LaurentPoly r = constant(ring_->one());
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
  }
  LaurentPoly map(const RingMap& phi) const {
    std::vector<Element> r;
    for (const auto& x : c_) r.push_back(phi(x));
    return LaurentPoly(phi.target(), low_, std::move(r));
  }
  /// X -> 1/(u X) for a unit u.
  LaurentPoly substitute_inverse(const Element& u) const {
    if (is_zero()) return *this;
    const Element ui = *u.inverse();
    std::vector<Element> r(c_.size(), ring_->zero());
    for (int k = low_; k <= high(); ++k) r[high() - k] = coeff(k) * ui.pow_signed(k);
    return LaurentPoly(ring_, -high(), std::move(r));
  }
  /// X -> u X for a unit u.
  LaurentPoly dilated(const Element& u) const {
    std::vector<Element> r;
    for (int k = low_; k <= high(); ++k) r.push_back(coeff(k) * u.pow_signed(k));
    return LaurentPoly(ring_, low_, std::move(r));
  }
  /// Terms from the first to the last unit coefficient (zero if none).
  LaurentPoly unit_core() const {
    int a = low_, b = high();
    while (a <= b && !coeff(a).is_unit()) ++a;
    while (b >= a && !coeff(b).is_unit()) --b;
    if (a > b) return LaurentPoly(ring_);
    return LaurentPoly(ring_, a, std::vector<Element>(c_.begin() + (a - low_), c_.begin() + (b - low_) + 1));
  }
  bool in_S() const { return !is_zero() && first().is_unit() && last().is_unit(); }

  friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) {
    return same_ring(a.ring_, b.ring_) && a.low_ == b.low_ && a.c_ == b.c_;
  }

  /// Explicit exponent-coefficient pairs, e.g. {0:[1], 1:[80]}.
  std::string str() const {
    std::ostringstream os;
    os << '{';
    bool first_term = true;
    for (int k = low_; k <= high(); ++k) {
      if (coeff(k).is_zero()) continue;
      os << (first_term ? "" : ", ") << k << ':' << coeff(k).str();
      first_term = false;
    }
    os << '}';
    return os.str();
  }

  /// Human form such as 1-2X+X^2; coefficients are written as symmetric
  /// integers when they lie in Z/ell^N, otherwise as coordinate lists.
  std::string pretty() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first_term = true;
    for (int k = low_; k <= high(); ++k) {
      const Element& x = coeff(k);
      if (x.is_zero()) continue;
      std::optional<i64> iv = scalar_value(x);
      std::string body;
      bool neg = false;
      if (iv) {
        neg = *iv < 0;
        const i64 a = neg ? -*iv : *iv;
        if (a != 1 || k == 0) body = std::to_string(a);
      } else {
        body = x.str();
      }
      if (!first_term || neg) os << (neg ? "-" : "+");
      os << body;
      if (k != 0) os << 'X';
      if (k != 0 && k != 1) os << '^' << k;
      first_term = false;
    }
    return os.str();
  }

  static std::optional<i64> scalar_value(const Element& x) {
    if (x.ring()->kind() != Ring::Kind::Local) return std::nullopt;
    const auto& c = x.coords();
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i]) return std::nullopt;
    const i64 m = x.ring()->local().modulus;
    return c[0] > m / 2 ? c[0] - m : c[0];
  }

 private:
  RingPtr ring_;
  int low_ = 0;
  std::vector<Element> c_;

  void trim() {
    std::size_t a = 0;
    while (a < c_.size() && c_[a].is_zero()) ++a;
    std::size_t b = c_.size();
    while (b > a && c_[b - 1].is_zero()) --b;
    c_ = std::vector<Element>(c_.begin() + a, c_.begin() + b);
    low_ = c_.empty() ? 0 : low_ + static_cast<int>(a);
  }
  void check(const LaurentPoly& o) const {
    if (!same_ring(ring_, o.ring_)) throw RingMismatch("Laurent polynomials over different rings");
  }
  LaurentPoly combine(const LaurentPoly& o, bool sub) const {
    check(o);
    if (o.is_zero()) return *this;
    if (is_zero()) return sub ? -o : o;
    const int lo = std::min(low_, o.low_), hi = std::max(high(), o.high());
    std::vector<Element> r;
    r.reserve(hi - lo + 1);
    for (int k = lo; k <= hi; ++k) r.push_back(sub ? coeff(k) - o.coeff(k) : coeff(k) + o.coeff(k));
    return LaurentPoly(ring_, lo, std::move(r));
  }
};

/// A Laurent polynomial in S together with inverses of its extreme coefficients.
struct SWitness {
  LaurentPoly poly;
  Element first_inv;
  Element last_inv;

  static std::optional<SWitness> make(const LaurentPoly& p) {
    if (p.is_zero()) return std::nullopt;
    auto a = p.first().inverse();
    auto b = p.last().inverse();
    if (!a || !b) return std::nullopt;
    return SWitness{p, *a, *b};
  }
  bool verify() const { return (poly.first() * first_inv).is_one() && (poly.last() * last_inv).is_one(); }
};

class FractionS {
 public:
  /// num / den; den must be invertible in the fraction ring.
  FractionS(const LaurentPoly& num, const LaurentPoly& den) : num_(num), den_(canon(num_, den)) {}
  explicit FractionS(const LaurentPoly& p) : FractionS(p, LaurentPoly::constant(p.ring()->one())) {}

  static FractionS zero(const RingPtr& R) { return FractionS(LaurentPoly(R)); }
  static FractionS one(const RingPtr& R) { return FractionS(LaurentPoly::constant(R->one())); }
  static FractionS monomial(const Element& c, int k) { return FractionS(LaurentPoly::monomial(c, k)); }

  const RingPtr& ring() const { return num_.ring(); }
  const LaurentPoly& numerator() const { return num_; }
  const LaurentPoly& denominator() const { return den_.poly; }
  const SWitness& witness() const { return den_; }

  FractionS operator+(const FractionS& o) const {
    if (den_.poly == o.den_.poly) return FractionS(num_ + o.num_, den_.poly);
    return FractionS(num_ * o.den_.poly + o.num_ * den_.poly, den_.poly * o.den_.poly);
  }
  FractionS operator-(const FractionS& o) const {
    if (den_.poly == o.den_.poly) return FractionS(num_ - o.num_, den_.poly);
    return FractionS(num_ * o.den_.poly - o.num_ * den_.poly, den_.poly * o.den_.poly);
  }
  FractionS operator-() const { return FractionS(-num_, den_.poly); }
  FractionS operator*(const FractionS& o) const {
    return FractionS(num_ * o.num_, den_.poly * o.den_.poly);
  }
  FractionS scaled(const Element& a) const { return FractionS(num_.scaled(a), den_.poly); }
  FractionS shifted(int k) const { return FractionS(num_.shifted(k), den_.poly); }
  /// f(u X) for a unit u.
  FractionS dilated(const Element& u) const { return FractionS(num_.dilated(u), den_.poly.dilated(u)); }

  /// Equality in S^-1 A[X, X^-1]: S-elements are non-zerodivisors, so
  /// cross-multiplication decides it.
  friend bool operator==(const FractionS& a, const FractionS& b) {
    return a.num_ * b.den_.poly == b.num_ * a.den_.poly;
  }
  friend bool operator!=(const FractionS& a, const FractionS& b) { return !(a == b); }

  bool is_zero() const { return num_.is_zero(); }

  std::optional<FractionS> inverse() const {
    auto split = s_multiplier(num_);
    if (!split) return std::nullopt;
    return FractionS(den_.poly * split->first, split->second);
  }

  /// For P invertible in S^-1 A[X, X^-1], a pair (T, Q) with P*T = Q and Q in S;
  /// nullopt when P is not invertible.  Over a local ring P is invertible iff
  /// its reduction mod m is nonzero: then P = P1 + N with P1 in S (the span
  /// from the first to the last unit coefficient) and N nilpotent, and
  /// P * sum_k (-N)^k P1^(K-1-k) = P1^K.  Products are handled per component.
  static std::optional<std::pair<LaurentPoly, LaurentPoly>> s_multiplier(const LaurentPoly& P) {
    const RingPtr& R = P.ring();
    if (R->kind() == Ring::Kind::Product) {
      std::vector<std::pair<LaurentPoly, LaurentPoly>> parts;
      int deg = 0;
      for (std::size_t i = 0; i < R->components().size(); ++i) {
        auto sp = s_multiplier(P.map(RingMap::projection(R, i)));
        if (!sp) return std::nullopt;
        const int lo = sp->second.low();
        parts.emplace_back(sp->first.shifted(-lo), sp->second.shifted(-lo));
        deg = std::max(deg, parts.back().second.high());
      }
      std::vector<LaurentPoly> ts, qs;
      int tlo = 0, thi = 0;
      for (auto& [t, q] : parts) {
        const RingPtr& C = q.ring();
        const LaurentPoly pad = LaurentPoly(C, 0, {C->one(), C->one()}).pow(deg - q.high());
        ts.push_back(t * pad);
        qs.push_back(q * pad);
        tlo = std::min(tlo, ts.back().low());
        thi = std::max(thi, ts.back().high());
      }
      return std::make_pair(glue(R, ts, tlo, thi), glue(R, qs, 0, deg));
    }
    const LaurentPoly P1 = P.unit_core();
    if (P1.is_zero()) return std::nullopt;
    const LaurentPoly Nn = -(P - P1);
    int K = 1;
    for (LaurentPoly pw = Nn; !pw.is_zero(); pw = pw * Nn)
      if (++K > 64 * R->precision()) throw VerificationError("nilpotent part did not vanish");
    LaurentPoly top(R);
    LaurentPoly npow = LaurentPoly::constant(R->one());
    for (int i = 0; i < K; ++i) {
      top = top + npow * P1.pow(K - 1 - i);
      npow = npow * Nn;
    }
    return std::make_pair(top, P1.pow(K));
  }

  FractionS map_coefficients(const RingMap& phi) const {
    return FractionS(num_.map(phi), den_.poly.map(phi));
  }

  /// f(1/(u X)) for the unit u (u = q^n gives the transform on the dual side).
  FractionS substitute_inverse(const Element& u) const {
    return FractionS(num_.substitute_inverse(u), den_.poly.substitute_inverse(u));
  }

  /// Laurent-series coefficients on [lo, hi].
  std::vector<Element> expand(int lo, int hi) const {
    const RingPtr& R = ring();
    std::vector<Element> out;
    if (hi < lo) return out;
    const int reach = hi - std::min(lo, num_.is_zero() ? lo : num_.low());
    // inverse power series of the denominator (constant term 1)
    std::vector<Element> e{R->one()};
    const auto& D = den_.poly;
    for (int k = 1; k <= reach; ++k) {
      Element acc = R->zero();
      for (int i = 1; i <= std::min(k, D.high()); ++i) acc -= D.coeff(i) * e[k - i];
      e.push_back(acc);
    }
    for (int k = lo; k <= hi; ++k) {
      Element acc = R->zero();
      if (!num_.is_zero())
        for (int j = num_.low(); j <= std::min(num_.high(), k); ++j) acc += num_.coeff(j) * e[k - j];
      out.push_back(acc);
    }
    return out;
  }

  /// Componentwise reassembly over a product ring.  Denominators are padded
  /// by powers of (1+X) to a common degree so the result stays in S.
  static FractionS assemble(const RingPtr& R, const std::vector<FractionS>& parts) {
    int deg = 0, lo = 0, hi = 0;
    for (const auto& f : parts) deg = std::max(deg, f.den_.poly.high());
    std::vector<LaurentPoly> nums, dens;
    for (const auto& f : parts) {
      const RingPtr& C = f.ring();
      const LaurentPoly pad = LaurentPoly(C, 0, {C->one(), C->one()}).pow(deg - f.den_.poly.high());
      nums.push_back(f.num_ * pad);
      dens.push_back(f.den_.poly * pad);
      if (!nums.back().is_zero()) {
        lo = std::min(lo, nums.back().low());
        hi = std::max(hi, nums.back().high());
      }
    }
    return FractionS(glue(R, nums, lo, hi), glue(R, dens, 0, deg));
  }

  std::string str() const { return num_.str() + " / " + den_.poly.str(); }
  std::string pretty() const {
    const bool unit_den = den_.poly.high() == 0;
    if (unit_den) return num_.pretty();
    const bool mono = num_.coeffs().size() <= 1;
    return (mono ? num_.pretty() : "(" + num_.pretty() + ")") + "/(" + den_.poly.pretty() + ")";
  }

 private:
  LaurentPoly num_;
  SWitness den_;

  // Moves den to lowest exponent 0 with constant coefficient 1, adjusting num.
  static LaurentPoly glue(const RingPtr& R, const std::vector<LaurentPoly>& ps, int a, int b) {
    std::vector<Element> c;
    for (int k = a; k <= b; ++k) {
      std::vector<Element> comp;
      for (const auto& p : ps) comp.push_back(p.coeff(k));
      c.push_back(R->from_parts(std::move(comp)));
    }
    return LaurentPoly(R, a, std::move(c));
  }

  // Moves den into S (when it is merely invertible), then to lowest exponent
  // 0 with constant coefficient 1, adjusting num.
  static SWitness canon(LaurentPoly& num, LaurentPoly den) {
    auto w = SWitness::make(den);
    if (!w) {
      auto split = s_multiplier(den);
      if (!split) throw ContractError("denominator is not invertible in the fraction ring: " + den.str());
      num = num * split->first;
      den = split->second;
      w = SWitness::make(den);
    }
    const Element c0 = w->first_inv;
    LaurentPoly d = den.shifted(-den.low()).scaled(c0);
    num = num.shifted(-den.low()).scaled(c0);
    auto w2 = SWitness::make(d);
    return *w2;
  }
};

/// Coefficient data b_m (m >= floor) with explicit values and a declared tail
/// recurrence b_m = a_1 b_{m-1} + ... + a_r b_{m-r} for m >= tail_start.
/// Explicit values must run past tail_start; those extra terms form the
/// verification margin.
struct RecurrentStream {
  RingPtr ring;
  int floor = 0;
  std::vector<Element> values;  // b_floor, b_floor+1, ...
  int tail_start = 0;
  std::vector<Element> recurrence;

  int last() const { return floor + static_cast<int>(values.size()) - 1; }
  Element at(int m) const {
    if (m < floor) return ring->zero();
    if (m <= last()) return values[m - floor];
    throw ContractError("stream value outside the explicit window");
  }
  int margin() const { return last() - tail_start + 1; }

  /// Checks the recurrence on the margin; returns the first failing index.
  std::optional<int> first_violation() const {
    for (int m = std::max(tail_start, floor); m <= last(); ++m) {
      Element acc = ring->zero();
      for (std::size_t i = 0; i < recurrence.size(); ++i) acc += recurrence[i] * at(m - 1 - static_cast<int>(i));
      if (!(acc == at(m))) return m;
    }
    return std::nullopt;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(' << floor << ", [";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i].str();
    os << "], [";
    for (std::size_t i = 0; i < recurrence.size(); ++i) os << (i ? "," : "") << recurrence[i].str();
    os << "] from " << tail_start << ')';
    return os.str();
  }
};

/// P/D with D = 1 - a_1 X - ... - a_r X^r and P the truncation of D * sum b_m X^m.
inline FractionS rationalize(const RecurrentStream& s) {
  if (s.tail_start < s.floor) throw ContractError("tail recurrence must start at or above the support floor");
  if (s.last() < s.tail_start - 1) throw ContractError("stream window ends before the tail");
  if (s.margin() < 1) throw ContractError("stream has no verification margin");
  if (!s.recurrence.empty() && !s.recurrence.back().is_unit())
    throw ContractError("last recurrence coefficient is not a unit");
  if (auto bad = s.first_violation())
    throw VerificationError("declared tail recurrence fails at m = " + std::to_string(*bad));
  const LaurentPoly D = LaurentPoly::one_minus(s.ring, s.recurrence);
  std::vector<Element> p;
  for (int m = s.floor; m < s.tail_start; ++m) {
    Element acc = s.at(m);
    for (std::size_t i = 0; i < s.recurrence.size(); ++i) acc -= s.recurrence[i] * s.at(m - 1 - static_cast<int>(i));
    p.push_back(acc);
  }
  FractionS out(LaurentPoly(s.ring, s.floor, std::move(p)), D);
  const auto re = out.expand(s.floor, s.last());
  for (int m = s.floor; m <= s.last(); ++m)
    if (!(re[m - s.floor] == s.at(m))) throw VerificationError("re-expansion disagrees with the stream");
  return out;
}

}  // namespace ellgamma
