#pragma once

// Finite-precision models of Noetherian W(k)-algebras.
//
// A local ring is presented as  O[t]/(g(t))  with  O = Z[s]/(ell^N, u(s)),
// where u is a monic lift of an irreducible polynomial of degree f over F_ell
// (so O is the length-N Witt ring of F_{ell^f}) and g is monic of degree e with
// g = (t - a)^e mod ell.  e = 1 gives the unramified rings; f = 1 the ramified
// ones; both together give towers such as W_N(F_{3^6})[zeta_3].  Elements are
// stored as f*e coordinates modulo ell^N in the basis s^i t^j.
//
// Products and fiber products are built from local rings; their elements are
// tuples.  Fiber product components must share the residue field and every
// element satisfies the congruence in that field.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ellgamma/errors.hpp"

namespace ellgamma {

using i64 = std::int64_t;
using u128 = unsigned __int128;

namespace detail {

inline i64 norm_mod(i64 x, i64 m) {
  x %= m;
  return x < 0 ? x + m : x;
}

inline i64 mul_mod(i64 a, i64 b, i64 m) {
  return static_cast<i64>(static_cast<__int128>(a) * b % m);
}

inline i64 pow_mod(i64 b, u128 e, i64 m) {
  i64 r = 1 % m;
  b = norm_mod(b, m);
  while (e) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

inline i64 inv_mod(i64 a, i64 m) {
  i64 g = m, x = 0, x1 = 1, a1 = norm_mod(a, m);
  while (a1) {
    i64 q = g / a1;
    std::tie(g, a1) = std::make_pair(a1, g - q * a1);
    std::tie(x, x1) = std::make_pair(x1, x - q * x1);
  }
  if (g != 1) throw ContractError("inv_mod: not invertible");
  return norm_mod(x, m);
}

inline std::string u128_str(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

// Dense polynomials over F_p, lowest coefficient first, kept trimmed.
struct FpPoly {
  i64 p;
  std::vector<i64> c;

  FpPoly(i64 prime, std::vector<i64> coeffs) : p(prime), c(std::move(coeffs)) {
    for (auto& x : c) x = norm_mod(x, p);
    trim();
  }
  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }
  int deg() const { return static_cast<int>(c.size()) - 1; }
  bool zero() const { return c.empty(); }
  i64 lead() const { return c.back(); }
};

inline FpPoly fp_sub(const FpPoly& a, const FpPoly& b) {
  std::vector<i64> r(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) r[i] -= b.c[i];
  return FpPoly(a.p, std::move(r));
}

inline FpPoly fp_mul(const FpPoly& a, const FpPoly& b) {
  if (a.zero() || b.zero()) return FpPoly(a.p, {});
  std::vector<i64> r(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] = (r[i + j] + a.c[i] * b.c[j]) % a.p;
  return FpPoly(a.p, std::move(r));
}

inline std::pair<FpPoly, FpPoly> fp_divmod(const FpPoly& a, const FpPoly& b) {
  if (b.zero()) throw ContractError("FpPoly division by zero");
  std::vector<i64> r = a.c;
  std::vector<i64> q(a.c.size() >= b.c.size() ? a.c.size() - b.c.size() + 1 : 0, 0);
  const i64 li = inv_mod(b.lead(), a.p);
  for (int k = static_cast<int>(r.size()) - 1; k >= b.deg(); --k) {
    const i64 coef = r[k] * li % a.p;
    if (coef == 0) continue;
    q[k - b.deg()] = coef;
    for (int j = 0; j <= b.deg(); ++j) r[k - b.deg() + j] = norm_mod(r[k - b.deg() + j] - coef * b.c[j], a.p);
  }
  return {FpPoly(a.p, std::move(q)), FpPoly(a.p, std::move(r))};
}

inline FpPoly fp_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& m) {
  return fp_divmod(fp_mul(a, b), m).second;
}

inline FpPoly fp_powmod(FpPoly b, u128 e, const FpPoly& m) {
  FpPoly r(b.p, {1});
  r = fp_divmod(r, m).second;
  b = fp_divmod(b, m).second;
  while (e) {
    if (e & 1) r = fp_mulmod(r, b, m);
    b = fp_mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b) {
  while (!b.zero()) {
    auto r = fp_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// Inverse of a modulo m, or nullopt when gcd(a, m) != 1.
inline std::optional<FpPoly> fp_invmod(const FpPoly& a, const FpPoly& m) {
  FpPoly r0 = m, r1 = fp_divmod(a, m).second;
  FpPoly s0(a.p, {}), s1(a.p, {1});
  while (!r1.zero()) {
    auto [q, r] = fp_divmod(r0, r1);
    FpPoly s = fp_sub(s0, fp_mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  if (r0.deg() != 0) return std::nullopt;
  const i64 li = inv_mod(r0.lead(), a.p);
  for (auto& x : s0.c) x = x * li % a.p;
  return fp_divmod(s0, m).second;
}

inline std::vector<int> prime_factors(int n) {
  std::vector<int> out;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  if (n > 1) out.push_back(n);
  return out;
}

// Rabin's irreducibility test.
inline bool fp_irreducible(const FpPoly& u) {
  const int f = u.deg();
  if (f < 1) return false;
  if (f == 1) return true;
  const FpPoly x(u.p, {0, 1});
  auto frob_iter = [&](int k) {
    FpPoly y = x;
    for (int i = 0; i < k; ++i) y = fp_powmod(y, static_cast<u128>(u.p), u);
    return y;
  };
  if (!fp_sub(frob_iter(f), x).zero()) return false;
  for (int r : prime_factors(f)) {
    auto g = fp_gcd(u, fp_sub(frob_iter(f / r), x));
    if (g.deg() != 0) return false;
  }
  return true;
}

/// Smallest monic irreducible of degree f, ordering by the base-ell value of
/// (c_0, ..., c_{f-1}).
inline std::vector<i64> canonical_irreducible(i64 ell, int f) {
  std::vector<i64> c(f + 1, 0);
  c[f] = 1;
  if (f == 1) return c;  // u(s) = s
  while (true) {
    if (fp_irreducible(FpPoly(ell, c))) return c;
    int i = 0;
    while (i < f && ++c[i] == ell) c[i++] = 0;
    if (i == f) throw ContractError("no irreducible polynomial found");
  }
}

inline std::string poly_text(const std::vector<i64>& coeffs, i64 modulus, char var) {
  std::ostringstream os;
  bool first = true;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) {
    i64 v = norm_mod(coeffs[k], modulus);
    if (v > modulus / 2) v -= modulus;
    if (v == 0) continue;
    const bool neg = v < 0;
    const i64 a = neg ? -v : v;
    if (first) {
      if (neg) os << '-';
    } else {
      os << (neg ? '-' : '+');
    }
    first = false;
    if (k == 0) {
      os << a;
    } else {
      if (a != 1) os << a << '*';
      os << var;
      if (k > 1) os << '^' << k;
    }
  }
  if (first) os << '0';
  return os.str();
}

}  // namespace detail

class Ring;
class Element;
class RingMap;
using RingPtr = std::shared_ptr<const Ring>;

class Ring : public std::enable_shared_from_this<Ring> {
 public:
  enum class Kind { Local, Product, Fiber };

  struct LocalData {
    i64 ell = 0;
    int N = 0;
    i64 modulus = 0;
    int f = 1;
    int e = 1;
    std::vector<i64> u;  // monic, degree f, reduced mod ell^N
    std::vector<i64> g;  // monic, degree e, reduced mod ell^N
    i64 root = 0;        // g = (t - root)^e mod ell
  };

  Kind kind() const { return kind_; }
  bool is_local_presentation() const { return kind_ == Kind::Local; }
  /// Local rings and fiber products of local rings are local.
  bool is_local() const { return kind_ != Kind::Product; }

  const LocalData& local() const {
    if (kind_ != Kind::Local) throw ContractError("ring " + desc_ + " is not a local presentation");
    return ld_;
  }
  i64 ell() const { return ell_; }
  /// Smallest N with ell^N = 0 in the ring.
  int precision() const { return N_; }
  std::size_t dim() const { return static_cast<std::size_t>(ld_.f * ld_.e); }
  const std::vector<RingPtr>& components() const { return comps_; }
  const std::string& descriptor() const { return desc_; }

  /// Residue field (a local ring with N = 1, e = 1); only for local rings.
  RingPtr residue_field() const;
  /// Cardinality of the residue field, ell^f.
  u128 residue_cardinality() const;

  Element zero() const;
  Element one() const;
  Element from_int(i64 v) const;
  /// Generator s of the unramified part (local presentations).
  Element gen_s() const;
  /// Generator t of the ramified part (local presentations).
  Element gen_t() const;
  Element random(std::mt19937_64& rng) const;
  Element from_coords(std::vector<i64> c) const;
  Element from_parts(std::vector<Element> parts) const;

  /// Every e with e*e == e, found by searching the component splittings.
  std::vector<Element> idempotents() const;

  static RingPtr make_local(i64 ell, int N, int f, std::vector<i64> g_integer);
  static RingPtr make_unramified(i64 ell, int N, int f) { return make_local(ell, N, f, {0, 1}); }
  static RingPtr make_ramified(i64 ell, int N, std::vector<i64> g, int f = 1) {
    return make_local(ell, N, f, std::move(g));
  }
  static RingPtr make_product(std::vector<RingPtr> comps);
  static RingPtr make_fiber(RingPtr a, RingPtr b);

  struct Passkey {
   private:
    Passkey() = default;
    friend class Ring;
  };
  explicit Ring(Passkey) {}

 private:
  Kind kind_ = Kind::Local;
  i64 ell_ = 0;
  int N_ = 0;
  LocalData ld_;
  std::vector<RingPtr> comps_;
  std::string desc_;
  mutable std::shared_ptr<const Ring> residue_;

  friend class Element;
};

inline bool same_ring(const RingPtr& a, const RingPtr& b) {
  return a == b || (a && b && a->descriptor() == b->descriptor());
}

class Element {
 public:
  Element() = default;

  const RingPtr& ring() const { return ring_; }
  bool valid() const { return static_cast<bool>(ring_); }
  const std::vector<i64>& coords() const { return c_; }
  const std::vector<Element>& parts() const { return parts_; }

  bool is_zero() const {
    if (ring_->kind() == Ring::Kind::Local)
      return std::all_of(c_.begin(), c_.end(), [](i64 x) { return x == 0; });
    return std::all_of(parts_.begin(), parts_.end(), [](const Element& x) { return x.is_zero(); });
  }
  bool is_one() const { return *this == ring_->one(); }

  friend bool operator==(const Element& a, const Element& b) {
    if (!same_ring(a.ring_, b.ring_)) return false;
    return a.c_ == b.c_ && a.parts_ == b.parts_;
  }

  Element operator+(const Element& o) const { return combine(o, +1); }
  Element operator-(const Element& o) const { return combine(o, -1); }
  Element operator-() const { return ring_->zero() - *this; }
  Element operator*(const Element& o) const;
  Element& operator+=(const Element& o) { return *this = *this + o; }
  Element& operator-=(const Element& o) { return *this = *this - o; }
  Element& operator*=(const Element& o) { return *this = *this * o; }

  Element pow(u128 e) const {
    Element r = ring_->one(), b = *this;
    while (e) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }
  /// Integer power; negative exponents need a unit.
  Element pow_signed(i64 k) const {
    if (k >= 0) return pow(static_cast<u128>(k));
    auto inv = inverse();
    if (!inv) throw ContractError("negative power of a non-unit");
    return inv->pow(static_cast<u128>(-k));
  }
  Element scaled(i64 k) const { return *this * ring_->from_int(k); }

  /// Image in the residue field (local rings and fiber products).
  Element residue() const;

  bool is_unit() const { return inverse().has_value(); }
  /// Inverse by residue-field inversion followed by Newton lifting
  /// y <- y(2 - xy) through the nilpotent maximal ideal.
  std::optional<Element> inverse() const;

  std::string str() const;

 private:
  RingPtr ring_;
  std::vector<i64> c_;
  std::vector<Element> parts_;

  Element combine(const Element& o, int sign) const;
  void check_same(const Element& o) const {
    if (!same_ring(ring_, o.ring_))
      throw RingMismatch("ring mismatch: " + (ring_ ? ring_->descriptor() : "<none>") + " vs " +
                         (o.ring_ ? o.ring_->descriptor() : "<none>"));
  }
  std::optional<Element> local_inverse() const;

  friend class Ring;
};

// ---------------------------------------------------------------------------
// Ring construction

inline RingPtr Ring::make_local(i64 ell, int N, int f, std::vector<i64> g) {
  if (ell < 3 || ell % 2 == 0) throw ContractError("ell must be an odd prime");
  for (i64 d = 2; d * d <= ell; ++d)
    if (ell % d == 0) throw ContractError("ell must be prime");
  if (N < 1 || f < 1) throw ContractError("precision and residue degree must be positive");
  i64 mod = 1;
  for (int i = 0; i < N; ++i) {
    if (mod > (i64{1} << 40) / ell) throw ContractError("ell^N exceeds 2^40");
    mod *= ell;
  }
  while (g.size() > 1 && detail::norm_mod(g.back(), mod) == 0) g.pop_back();
  if (g.size() < 2 || detail::norm_mod(g.back(), mod) != 1) throw ContractError("g must be monic of positive degree");
  const int e = static_cast<int>(g.size()) - 1;
  // g mod ell must be (t - a)^e
  std::optional<i64> root;
  for (i64 a = 0; a < ell && !root; ++a) {
    detail::FpPoly lin(ell, {-a, 1});
    detail::FpPoly pw(ell, {1});
    for (int i = 0; i < e; ++i) pw = detail::fp_mul(pw, lin);
    if (detail::fp_sub(pw, detail::FpPoly(ell, g)).zero()) root = a;
  }
  if (!root) throw ContractError("g mod ell is not a power of a linear factor: ring would not be local");

  auto r = std::make_shared<Ring>(Passkey{});
  r->kind_ = Kind::Local;
  r->ell_ = ell;
  r->N_ = N;
  r->ld_.ell = ell;
  r->ld_.N = N;
  r->ld_.modulus = mod;
  r->ld_.f = f;
  r->ld_.e = e;
  r->ld_.u = detail::canonical_irreducible(ell, f);
  for (auto& x : g) x = detail::norm_mod(x, mod);
  r->ld_.g = g;
  r->ld_.root = *root;
  std::ostringstream os;
  if (e == 1 && g[0] == 0) {
    os << "unram(" << ell << ',' << N << ',' << f << ')';
  } else {
    os << "ram(" << ell << ',' << N << ',' << detail::poly_text(g, mod, 't');
    if (f != 1) os << ',' << f;
    os << ')';
  }
  r->desc_ = os.str();
  return r;
}

inline RingPtr Ring::make_product(std::vector<RingPtr> comps) {
  if (comps.size() < 2) throw ContractError("a product needs at least two components");
  auto r = std::make_shared<Ring>(Passkey{});
  r->kind_ = Kind::Product;
  r->ell_ = comps.front()->ell();
  std::string d = "prod(";
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i]->ell() != r->ell_) throw ContractError("product components must share ell");
    r->N_ = std::max(r->N_, comps[i]->precision());
    d += (i ? "," : "") + comps[i]->descriptor();
  }
  r->desc_ = d + ")";
  r->comps_ = std::move(comps);
  return r;
}

inline RingPtr Ring::make_fiber(RingPtr a, RingPtr b) {
  if (!a->is_local() || !b->is_local()) throw ContractError("fiber product components must be local");
  if (!same_ring(a->residue_field(), b->residue_field()))
    throw ContractError("fiber product components must share the residue field");
  auto r = std::make_shared<Ring>(Passkey{});
  r->kind_ = Kind::Fiber;
  r->ell_ = a->ell();
  r->N_ = std::max(a->precision(), b->precision());
  r->desc_ = "fiber(" + a->descriptor() + "," + b->descriptor() + ")";
  r->comps_ = {std::move(a), std::move(b)};
  return r;
}

inline RingPtr Ring::residue_field() const {
  switch (kind_) {
    case Kind::Local:
      if (ld_.N == 1 && ld_.e == 1) return shared_from_this();
      if (!residue_) residue_ = make_unramified(ld_.ell, 1, ld_.f);
      return residue_;
    case Kind::Fiber:
      return comps_[0]->residue_field();
    case Kind::Product:
      break;
  }
  throw ContractError("product ring " + desc_ + " has no residue field");
}

inline u128 Ring::residue_cardinality() const {
  const int f = residue_field()->local().f;
  u128 q = 1;
  for (int i = 0; i < f; ++i) {
    if (q > (~u128{0}) / static_cast<u128>(ell_) / 2) throw ContractError("residue field too large");
    q *= static_cast<u128>(ell_);
  }
  return q;
}

inline Element Ring::zero() const { return from_int(0); }
inline Element Ring::one() const { return from_int(1); }

inline Element Ring::from_int(i64 v) const {
  Element x;
  x.ring_ = shared_from_this();
  if (kind_ == Kind::Local) {
    x.c_.assign(dim(), 0);
    x.c_[0] = detail::norm_mod(v, ld_.modulus);
  } else {
    for (const auto& c : comps_) x.parts_.push_back(c->from_int(v));
  }
  return x;
}

inline Element Ring::from_coords(std::vector<i64> c) const {
  if (kind_ != Kind::Local) throw ContractError("coordinates only for local presentations");
  if (c.size() > dim()) throw ContractError("too many coordinates for " + desc_);
  c.resize(dim(), 0);
  for (auto& v : c) v = detail::norm_mod(v, ld_.modulus);
  Element x;
  x.ring_ = shared_from_this();
  x.c_ = std::move(c);
  return x;
}

inline Element Ring::from_parts(std::vector<Element> parts) const {
  if (kind_ == Kind::Local) throw ContractError("tuples need a product or fiber ring");
  if (parts.size() != comps_.size()) throw ContractError("wrong number of components for " + desc_);
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (!same_ring(parts[i].ring(), comps_[i])) throw RingMismatch("component ring mismatch in " + desc_);
  if (kind_ == Kind::Fiber && !(parts[0].residue() == parts[1].residue()))
    throw ContractError("fiber product element violates the residue congruence: " + parts[0].str() + " vs " +
                        parts[1].str());
  Element x;
  x.ring_ = shared_from_this();
  x.parts_ = std::move(parts);
  return x;
}

inline Element Ring::gen_s() const {
  const auto& L = local();
  std::vector<i64> c(dim(), 0);
  if (L.f > 1)
    c[1] = 1;
  else
    c[0] = detail::norm_mod(-L.u[0], L.modulus);
  return from_coords(c);
}

inline Element Ring::gen_t() const {
  const auto& L = local();
  std::vector<i64> c(dim(), 0);
  if (L.e > 1)
    c[L.f] = 1;
  else
    c[0] = detail::norm_mod(-L.g[0], L.modulus);
  return from_coords(c);
}

inline Element Ring::random(std::mt19937_64& rng) const {
  if (kind_ == Kind::Local) {
    std::uniform_int_distribution<i64> d(0, ld_.modulus - 1);
    std::vector<i64> c(dim());
    for (auto& v : c) v = d(rng);
    return from_coords(std::move(c));
  }
  std::vector<Element> parts;
  for (const auto& c : comps_) parts.push_back(c->random(rng));
  if (kind_ == Kind::Fiber) {
    // Replace the residue of the second component by that of the first.
    const Element r1 = parts[0].residue(), r2 = parts[1].residue();
    const auto& L = comps_[1]->local();
    std::vector<i64> shift(comps_[1]->dim(), 0);
    for (int i = 0; i < L.f; ++i) shift[i] = r1.coords()[i] - r2.coords()[i];
    parts[1] = parts[1] + comps_[1]->from_coords(shift);
  }
  return from_parts(std::move(parts));
}

inline std::vector<Element> Ring::idempotents() const {
  if (kind_ == Kind::Local) return {zero(), one()};
  std::vector<std::vector<Element>> acc{{}};
  for (const auto& c : comps_) {
    std::vector<std::vector<Element>> next;
    for (const auto& prefix : acc)
      for (const auto& e : c->idempotents()) {
        auto v = prefix;
        v.push_back(e);
        next.push_back(std::move(v));
      }
    acc = std::move(next);
  }
  std::vector<Element> out;
  for (auto& parts : acc) {
    if (kind_ == Kind::Fiber && !(parts[0].residue() == parts[1].residue())) continue;
    out.push_back(from_parts(std::move(parts)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Element arithmetic

inline Element Element::combine(const Element& o, int sign) const {
  check_same(o);
  Element r;
  r.ring_ = ring_;
  if (ring_->kind() == Ring::Kind::Local) {
    const i64 m = ring_->local().modulus;
    r.c_.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) {
      i64 v = sign > 0 ? c_[i] + o.c_[i] : c_[i] - o.c_[i];
      if (v >= m) v -= m;
      if (v < 0) v += m;
      r.c_[i] = v;
    }
  } else {
    r.parts_.reserve(parts_.size());
    for (std::size_t i = 0; i < parts_.size(); ++i)
      r.parts_.push_back(parts_[i].combine(o.parts_[i], sign));
  }
  return r;
}

inline Element Element::operator*(const Element& o) const {
  check_same(o);
  Element r;
  r.ring_ = ring_;
  if (ring_->kind() != Ring::Kind::Local) {
    r.parts_.reserve(parts_.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) r.parts_.push_back(parts_[i] * o.parts_[i]);
    return r;
  }
  const auto& L = ring_->local();
  const int f = L.f, e = L.e;
  const i64 m = L.modulus;
  const int F2 = 2 * f - 1, E2 = 2 * e - 1;
  // full two-variable convolution: index (j, i) -> j*F2 + i
  std::vector<u128> acc(static_cast<std::size_t>(F2) * E2, 0);
  for (int j1 = 0; j1 < e; ++j1)
    for (int i1 = 0; i1 < f; ++i1) {
      const i64 a = c_[j1 * f + i1];
      if (!a) continue;
      for (int j2 = 0; j2 < e; ++j2)
        for (int i2 = 0; i2 < f; ++i2) {
          const i64 b = o.c_[j2 * f + i2];
          if (b) acc[(j1 + j2) * F2 + i1 + i2] += static_cast<u128>(a) * static_cast<u128>(b);
        }
    }
  std::vector<i64> t(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) t[k] = static_cast<i64>(acc[k] % static_cast<u128>(m));
  // reduce s-degree by u (monic)
  for (int j = 0; j < E2; ++j) {
    i64* blk = &t[j * F2];
    for (int k = F2 - 1; k >= f; --k) {
      const i64 c = blk[k];
      if (!c) continue;
      blk[k] = 0;
      for (int i = 0; i < f; ++i)
        if (L.u[i]) blk[k - f + i] = detail::norm_mod(blk[k - f + i] - detail::mul_mod(c, L.u[i], m), m);
    }
  }
  // reduce t-degree by g (monic, integer coefficients)
  for (int k = E2 - 1; k >= e; --k) {
    for (int i = 0; i < f; ++i) {
      const i64 c = t[k * F2 + i];
      if (!c) continue;
      t[k * F2 + i] = 0;
      for (int j = 0; j < e; ++j)
        if (L.g[j]) {
          i64& dst = t[(k - e + j) * F2 + i];
          dst = detail::norm_mod(dst - detail::mul_mod(c, L.g[j], m), m);
        }
    }
  }
  r.c_.assign(static_cast<std::size_t>(f * e), 0);
  for (int j = 0; j < e; ++j)
    for (int i = 0; i < f; ++i) r.c_[j * f + i] = t[j * F2 + i];
  return r;
}

inline Element Element::residue() const {
  if (ring_->kind() == Ring::Kind::Fiber) return parts_[0].residue();
  const auto& L = ring_->local();
  const RingPtr k = ring_->residue_field();
  std::vector<i64> out(L.f, 0);
  i64 apow = 1;
  for (int j = 0; j < L.e; ++j) {
    for (int i = 0; i < L.f; ++i) out[i] = (out[i] + (c_[j * L.f + i] % L.ell) * apow) % L.ell;
    apow = apow * L.root % L.ell;
  }
  return k->from_coords(std::move(out));
}

inline std::optional<Element> Element::local_inverse() const {
  const auto& L = ring_->local();
  const Element r = residue();
  detail::FpPoly rp(L.ell, r.coords()), up(L.ell, L.u);
  if (rp.zero()) return std::nullopt;
  auto ri = detail::fp_invmod(rp, up);
  if (!ri) return std::nullopt;
  std::vector<i64> lift(ring_->dim(), 0);
  for (std::size_t i = 0; i < ri->c.size(); ++i) lift[i] = ri->c[i];
  Element y = ring_->from_coords(std::move(lift));
  const Element two = ring_->from_int(2);
  for (int it = 0; it < 80; ++it) {
    const Element xy = *this * y;
    if (xy.is_one()) return y;
    y = y * (two - xy);
  }
  throw VerificationError("Newton lifting of an inverse did not converge in " + ring_->descriptor());
}

inline std::optional<Element> Element::inverse() const {
  if (ring_->kind() == Ring::Kind::Local) return local_inverse();
  std::vector<Element> inv;
  for (const auto& p : parts_) {
    auto i = p.inverse();
    if (!i) return std::nullopt;
    inv.push_back(std::move(*i));
  }
  return ring_->from_parts(std::move(inv));
}

inline std::string Element::str() const {
  std::ostringstream os;
  if (ring_->kind() == Ring::Kind::Local) {
    os << '[';
    for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
    os << ']';
  } else {
    os << '(';
    for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? ", " : "") << parts_[i].str();
    os << ')';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Teichmüller representatives and roots of unity

/// The root of unity of order dividing ell^f - 1 congruent to x in the residue
/// field; the fixed point of y -> y^(ell^f).
inline Element teichmuller(const Element& x) {
  const RingPtr& R = x.ring();
  if (!R->is_local()) throw ContractError("teichmuller needs a local ring");
  if (!x.is_unit()) throw ContractError("teichmuller of a non-unit");
  if (R->kind() == Ring::Kind::Fiber)
    return R->from_parts({teichmuller(x.parts()[0]), teichmuller(x.parts()[1])});
  const auto& L = R->local();
  Element y = x;
  const int bound = 4 * L.N * L.e + 8;
  for (int it = 0; it < bound; ++it) {
    Element z = y;
    for (int i = 0; i < L.f; ++i) z = z.pow(static_cast<u128>(L.ell));
    if (z == y) return y;
    y = std::move(z);
  }
  throw VerificationError("teichmuller iteration did not reach a fixed point");
}

/// Primitive root of unity of order p^depth in a local presentation, or
/// nullopt when p^depth does not divide ell^f - 1.
inline std::optional<Element> primitive_root_of_unity(const RingPtr& R, i64 p, int depth) {
  const auto& L = R->local();
  if (depth == 0) return R->one();
  u128 order = 1;
  for (int i = 0; i < depth; ++i) order *= static_cast<u128>(p);
  const u128 Q = R->residue_cardinality();
  if ((Q - 1) % order != 0) return std::nullopt;
  const u128 cof = (Q - 1) / order;
  const u128 sub = order / static_cast<u128>(p);
  detail::FpPoly up(L.ell, L.u);
  std::vector<i64> digits(L.f, 0);
  while (true) {
    int i = 0;
    while (i < L.f && ++digits[i] == L.ell) digits[i++] = 0;
    if (i == L.f) break;
    detail::FpPoly y(L.ell, digits);
    auto z = detail::fp_powmod(y, cof, up);
    auto zs = detail::fp_powmod(z, sub, up);
    if (zs.deg() == 0 && zs.c[0] == 1) continue;
    std::vector<i64> lift(R->dim(), 0);
    for (std::size_t k = 0; k < z.c.size(); ++k) lift[k] = z.c[k];
    return teichmuller(R->from_coords(std::move(lift)));
  }
  return std::nullopt;
}

/// Square root of a unit: residue search, then Newton y <- y - (y^2 - x)/2y.
inline std::optional<Element> square_root(const Element& x) {
  const RingPtr& R = x.ring();
  if (!x.is_unit()) throw ContractError("square_root needs a unit");
  if (R->kind() != Ring::Kind::Local) {
    std::vector<Element> parts;
    for (const auto& c : x.parts()) {
      auto r = square_root(c);
      if (!r) return std::nullopt;
      parts.push_back(*r);
    }
    // fiber parts must share a residue; flip the sign of the second if needed
    if (R->kind() == Ring::Kind::Fiber && !(parts[0].residue() == parts[1].residue())) parts[1] = -parts[1];
    return R->from_parts(std::move(parts));
  }
  const auto& L = R->local();
  std::vector<i64> digits(L.f, 0);
  std::optional<Element> y;
  while (!y) {
    std::vector<i64> c(R->dim(), 0);
    std::copy(digits.begin(), digits.end(), c.begin());
    Element cand = R->from_coords(std::move(c));
    if (cand.is_unit() && (cand * cand - x).residue().is_zero()) y = cand;
    int i = 0;
    while (i < L.f && ++digits[i] == L.ell) digits[i++] = 0;
    if (i == L.f && !y) return std::nullopt;
  }
  const Element half = *R->from_int(2).inverse();
  for (int it = 0; it < 4 * L.N * L.e + 8; ++it) {
    const Element d = *y * *y - x;
    if (d.is_zero()) return y;
    y = *y - d * half * *y->inverse();
  }
  throw VerificationError("square root iteration did not converge");
}

// ---------------------------------------------------------------------------
// Ring homomorphisms

class RingMap {
 public:
  using Fn = std::function<Element(const Element&)>;

  RingMap(RingPtr src, RingPtr dst, Fn fn, std::string text)
      : src_(std::move(src)), dst_(std::move(dst)), fn_(std::move(fn)), text_(std::move(text)) {}

  const RingPtr& source() const { return src_; }
  const RingPtr& target() const { return dst_; }
  const std::string& text() const { return text_; }

  Element operator()(const Element& x) const {
    if (!same_ring(x.ring(), src_))
      throw RingMismatch("ring map " + text_ + " applied to an element of " + x.ring()->descriptor());
    return fn_(x);
  }

  static RingMap identity(const RingPtr& R) {
    return RingMap(R, R, [](const Element& x) { return x; }, "id");
  }

  /// Map out of a local presentation given the images of s and t.  Checks
  /// that ell^N, u(s) and g(t) map to zero.
  static RingMap from_generators(const RingPtr& src, const RingPtr& dst, const Element& s_img,
                                 const Element& t_img, std::string text) {
    const auto& L = src->local();
    if (!same_ring(s_img.ring(), dst) || !same_ring(t_img.ring(), dst))
      throw RingMismatch("generator images must lie in the target ring");
    if (dst->ell() != L.ell || !dst->from_int(L.modulus).is_zero())
      throw ContractError("ell^N of the source does not vanish in the target");
    auto eval_int_poly = [&](const std::vector<i64>& poly, const Element& x) {
      Element acc = dst->zero();
      for (int k = static_cast<int>(poly.size()) - 1; k >= 0; --k) acc = acc * x + dst->from_int(poly[k]);
      return acc;
    };
    if (!eval_int_poly(L.u, s_img).is_zero()) throw ContractError("image of s is not a root of u");
    if (!eval_int_poly(L.g, t_img).is_zero()) throw ContractError("image of t is not a root of g");
    std::vector<Element> spow{dst->one()}, tpow{dst->one()};
    for (int i = 1; i < L.f; ++i) spow.push_back(spow.back() * s_img);
    for (int j = 1; j < L.e; ++j) tpow.push_back(tpow.back() * t_img);
    std::vector<Element> basis;
    for (int j = 0; j < L.e; ++j)
      for (int i = 0; i < L.f; ++i) basis.push_back(spow[i] * tpow[j]);
    Fn fn = [basis, dst](const Element& x) {
      Element acc = dst->zero();
      const auto& c = x.coords();
      for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k]) acc += basis[k].scaled(c[k]);
      return acc;
    };
    return RingMap(src, dst, std::move(fn), std::move(text));
  }

  static RingMap projection(const RingPtr& src, std::size_t k) {
    if (src->kind() == Ring::Kind::Local) throw ContractError("projection from a local presentation");
    if (k >= src->components().size()) throw ContractError("projection index out of range");
    return RingMap(src, src->components()[k], [k](const Element& x) { return x.parts()[k]; },
                   "pr" + std::to_string(k + 1));
  }

  /// Reduction modulo the maximal ideal.
  static RingMap residue(const RingPtr& src) {
    return RingMap(src, src->residue_field(), [](const Element& x) { return x.residue(); }, "mod m");
  }

  static RingMap compose(const RingMap& second, const RingMap& first) {
    if (!same_ring(first.target(), second.source())) throw RingMismatch("cannot compose ring maps");
    Fn a = first.fn_, b = second.fn_;
    return RingMap(first.source(), second.target(), [a, b](const Element& x) { return b(a(x)); },
                   second.text() + " o " + first.text());
  }

  /// x -> (f_1(x), ..., f_k(x)) into a product or fiber product.
  static RingMap into_tuple(const RingPtr& dst, std::vector<RingMap> maps) {
    if (maps.empty()) throw ContractError("into_tuple needs maps");
    RingPtr src = maps[0].source();
    std::string text = "(";
    for (std::size_t i = 0; i < maps.size(); ++i) text += (i ? "," : "") + maps[i].text();
    Fn fn = [dst, maps](const Element& x) {
      std::vector<Element> parts;
      for (const auto& m : maps) parts.push_back(m(x));
      return dst->from_parts(std::move(parts));
    };
    return RingMap(src, dst, std::move(fn), text + ")");
  }

 private:
  RingPtr src_, dst_;
  Fn fn_;
  std::string text_;
};

/// Smallest unramified enlargement of a local presentation whose Teichmüller
/// group contains mu_{p^m}, with the inclusion map.
inline std::pair<RingPtr, RingMap> required_cyclotomic_extension(const RingPtr& R, int m, i64 p) {
  const auto& L = R->local();
  if (m <= 0) return {R, RingMap::identity(R)};
  i64 pm = 1;
  for (int i = 0; i < m; ++i) pm *= p;
  int f2 = L.f;
  while (detail::pow_mod(L.ell, static_cast<u128>(f2), pm) != 1 % pm) {
    f2 += L.f;
    if (f2 > 400) throw ContractError("required residue degree exceeds 400");
  }
  if (f2 == L.f) return {R, RingMap::identity(R)};
  RingPtr big = Ring::make_local(L.ell, L.N, f2, L.g);
  // image of s: a root of u in the bigger ring, found in the residue field
  // inside the copy of F_{ell^f} and lifted by Newton iteration
  Element s_img = big->zero();
  if (L.f > 1) {
    const auto& B = big->local();
    detail::FpPoly U(L.ell, L.u), UB(L.ell, B.u);
    const u128 QB = big->residue_cardinality();
    const u128 Qs = R->residue_cardinality();
    const u128 norm_exp = (QB - 1) / (Qs - 1);
    std::optional<detail::FpPoly> root;
    std::vector<i64> digits(f2, 0);
    while (!root) {
      int i = 0;
      while (i < f2 && ++digits[i] == L.ell) digits[i++] = 0;
      if (i == f2) throw VerificationError("no root of u found in the extension");
      const detail::FpPoly w = detail::fp_powmod(detail::FpPoly(L.ell, digits), norm_exp, UB);
      detail::FpPoly y(L.ell, {1});
      for (u128 k = 0; k + 1 < Qs && !root; ++k) {
        detail::FpPoly val(L.ell, {});
        for (int c = L.f; c >= 0; --c) val = detail::fp_divmod(detail::fp_sub(detail::fp_mul(val, y), detail::FpPoly(L.ell, {-L.u[c]})), UB).second;
        if (val.zero()) root = y;
        y = detail::fp_mulmod(y, w, UB);
      }
    }
    std::vector<i64> lift(big->dim(), 0);
    for (std::size_t k = 0; k < root->c.size(); ++k) lift[k] = root->c[k];
    Element r = big->from_coords(std::move(lift));
    auto upoly = [&](const Element& x, bool deriv) {
      Element acc = big->zero();
      for (int c = L.f; c >= (deriv ? 1 : 0); --c)
        acc = acc * x + big->from_int(deriv ? L.u[c] * c : L.u[c]);
      return acc;
    };
    for (int it = 0; it < 64; ++it) {
      const Element v = upoly(r, false);
      if (v.is_zero()) break;
      r = r - v * *upoly(r, true).inverse();
    }
    s_img = r;
  }
  RingMap inc = RingMap::from_generators(R, big, s_img, big->gen_t(), "incl");
  return {big, inc};
}

}  // namespace ellgamma
