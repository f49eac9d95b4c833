#pragma once

// Zeta integrals
//   Z(W, X; j) = sum_m (q^(n-1) X)^m int_{F^j} int_U W([p^m a 0 0; x I_j 0; 0 0 I]) d^x a dx,
// L-factors of characters, and gamma factors extracted from an invertible
// pivot and checked against every member of a battery.

#include <future>
#include <map>

#include "ellgamma/whittaker.hpp"

namespace ellgamma {

struct ZetaOptions {
  StreamOptions stream;
  int max_shells = 10;  // bound on the x-window growth for j >= 1
  int zero_shells = 2;  // consecutive empty shells that count as stabilized
  std::optional<Element> vol_O;  // dx(O); defaults to the psi-self-dual q^(c/2)
};

struct ZetaResult {
  FractionS value;
  RecurrentStream stream;
  int j = 0;
  int x_window = 0;        // M with x in p^-M O (j >= 1)
  int x_resolution = 0;    // L with x taken modulo p^L O (j >= 1)
  bool floor_hit = false;  // the window reached the support floor
  bool recurrence_verified = false;
};

/// vol(O) for the measure self-dual with respect to psi of kernel p^c.
inline Element self_dual_volume(const RingPtr& R, i64 p, int c) {
  const Element qc2 = R->from_int(ipow(p, c / 2));
  if (c % 2 == 0) return qc2;
  auto r = square_root(R->from_int(p));
  if (!r) throw MissingRootsError("coefficient ring lacks a square root of " + std::to_string(p), 0);
  return qc2 * *r;
}

namespace detail {

inline void assert_in_s(const FractionS& f) {
  const auto& d = f.denominator();
  if (!d.first().is_unit() || !d.last().is_unit())
    throw VerificationError("zeta denominator left S: " + d.pretty());
}

// sum over x in the shell v(x) = -M (or the ball p^L O when M = -L) of the
// x-translated torus integrals, for m in [lo, hi]
inline std::vector<Element> shell_values(const Whittaker& W, int M, int L, int c, int lo, int hi) {
  const i64 p = W.p();
  const RingPtr& R = W.ring();
  std::vector<PAdic> xs;
  if (M == -L) {
    xs.push_back(PAdic::zero(p));
  } else {
    const i64 span = ipow(p, M + L);
    for (i64 u = 1; u < span; ++u)
      if (u % p) xs.push_back(PAdic(p, u).shifted(-M));
  }
  std::vector<Element> out(hi - lo + 1, R->zero());
  for (const PAdic& x : xs) {
    const PAdicMatrix h = PAdicMatrix::elementary(W.n(), 1, 0, x);
    for (int m = lo; m <= hi; ++m)
      out[m - lo] += integrate_units([&](i64 u) { return W(torus_point(p, W.n(), m, u) * h); }, R, p, c);
  }
  return out;
}

// support floor of the x-averaged function over the ball p^-M O
inline int averaged_floor(const Whittaker& W, int M, int L) {
  int f = W.support_floor();
  for (int v = -M; v < L; ++v)
    f = std::min(f, W.translate(PAdicMatrix::elementary(W.n(), 1, 0, PAdic::p_power(W.p(), v)), "u").support_floor());
  return f;
}

}  // namespace detail

inline ZetaResult zeta_integral(const Whittaker& W, int j, const ZetaOptions& opt = {}) {
  const int n = W.n();
  const RingPtr& R = W.ring();
  const i64 p = W.p();
  if (j < 0 || j > std::max(0, n - 2)) throw ContractError("zeta index j must lie in [0, n-2]");
  const Element qn1 = R->from_int(ipow(p, n - 1));
  ZetaResult res{FractionS::zero(R), {}, j};

  if (j == 0) {
    res.stream = torus_stream(W, opt.stream);
  } else {
    if (j != 1 || n != 3) throw ContractError("j >= 1 zeta integrals are provided for n = 3, j = 1");
    const int L = W.depth(1, 0);
    int c = W.unit_resolution();
    const Element vol = opt.vol_O ? *opt.vol_O : self_dual_volume(R, p, W.kernel_exponent());
    const Element cell = vol * R->from_int(p).inverse()->pow_signed(L);  // vol(p^L O)

    // grow the ball until zero_shells consecutive shells vanish on the window
    const int span = opt.stream.window + opt.stream.margin;
    int M = -L, empty = 0;
    while (empty < opt.zero_shells) {
      if (M - (-L) > opt.max_shells)
        throw VerificationError("x-integral did not stabilize within " + std::to_string(opt.max_shells) + " shells");
      ++M;
      const int lo = detail::averaged_floor(W, M, L);
      const auto sv = detail::shell_values(W, M, L, c, lo, lo + span - 1);
      const bool zero = std::all_of(sv.begin(), sv.end(), [](const Element& e) { return e.is_zero(); });
      empty = zero ? empty + 1 : 0;
    }
    M -= opt.zero_shells;
    res.x_window = M;
    res.x_resolution = L;

    auto provider = [&](int lo, int hi) {
      std::vector<Element> acc(hi - lo + 1, R->zero());
      for (int s = -L; s <= M; ++s) {
        const auto sv = detail::shell_values(W, s, L, c, lo, hi);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sv[i];
      }
      for (auto& e : acc) e *= cell;
      return acc;
    };
    const Element qn1inv = *qn1.inverse();
    std::vector<Element> roots = W.roots();
    for (auto& r : roots) r *= qn1inv;
    res.stream = assemble_stream(R, detail::averaged_floor(W, M, L), recurrence_from_roots(R, roots), provider,
                                 opt.stream);
  }
  res.floor_hit = true;
  res.value = rationalize(res.stream).dilated(qn1);
  res.recurrence_verified = true;
  detail::assert_in_s(res.value);
  return res;
}

/// L(chi, X): 1/(1 - chi(p) X) for unramified chi, 1 otherwise.
inline FractionS l_factor_gl1(const MultiplicativeCharacter& chi) {
  const RingPtr& R = chi.ring();
  if (chi.ramified()) return FractionS::one(R);
  return FractionS(LaurentPoly::constant(R->one()), LaurentPoly::one_minus(R, {chi.value_at_pi()}));
}

// ---------------------------------------------------------------------------
// Gamma factors

struct BatteryMember {
  std::string id;
  Whittaker W;
  int j = 0;
};

struct BatteryEntry {
  std::string id;
  int j = 0;
  FractionS lhs;  // Z(W, X; j) * gamma
  FractionS rhs;  // Z(tilde(w' W), 1/(q^n X); n-2-j)
  bool equal = false;
};

struct GammaCertificate {
  FractionS gamma;
  std::string pivot;
  std::optional<std::string> second_pivot;
  bool pivot_independent = false;  // gamma from the second pivot is eq-equal
  std::vector<BatteryEntry> battery;
  std::vector<std::string> components;  // idempotent decomposition, if any
  int psi_kernel = 1;

  bool verified() const {
    if (battery.empty()) return false;
    for (const auto& e : battery)
      if (!e.equal) return false;
    return !second_pivot || pivot_independent;
  }
};

/// g -> tilde(rho(w') W)(g) = W(w g^iota w').
inline Whittaker dual_whittaker(const Whittaker& W) {
  return W.translate(PAdicMatrix::w_prime(W.p(), W.n()), "w'").tilde();
}

namespace detail {

struct MemberZetas {
  FractionS z;
  FractionS dual;  // already substituted X -> 1/(q^n X)
};

inline MemberZetas member_zetas(const BatteryMember& b, const ZetaOptions& opt) {
  const int n = b.W.n();
  const Element qn = b.W.ring()->from_int(ipow(b.W.p(), n));
  FractionS z = zeta_integral(b.W, b.j, opt).value;
  FractionS d = zeta_integral(dual_whittaker(b.W), n - 2 - b.j, opt).value.substitute_inverse(qn);
  return {std::move(z), std::move(d)};
}

inline GammaCertificate gamma_connected(const std::vector<BatteryMember>& battery, const ZetaOptions& opt,
                                        bool concurrent) {
  std::vector<MemberZetas> zs;
  if (concurrent) {
    std::vector<std::future<MemberZetas>> fs;
    for (const auto& b : battery) fs.push_back(std::async(std::launch::async, member_zetas, std::cref(b), std::cref(opt)));
    for (auto& f : fs) zs.push_back(f.get());
  } else {
    for (const auto& b : battery) zs.push_back(member_zetas(b, opt));
  }
  std::optional<std::size_t> pivot, second;
  std::optional<FractionS> gamma, gamma2;
  for (std::size_t i = 0; i < battery.size(); ++i) {
    auto inv = zs[i].z.inverse();
    if (!inv) continue;
    if (!pivot) {
      pivot = i;
      gamma = zs[i].dual * *inv;
    } else if (!second) {
      second = i;
      gamma2 = zs[i].dual * *inv;
      break;
    }
  }
  if (!pivot) throw ContractError("no invertible pivot in the battery; enlarge the battery");
  GammaCertificate cert{*gamma, battery[*pivot].id};
  cert.psi_kernel = battery[*pivot].W.kernel_exponent();
  if (second) {
    cert.second_pivot = battery[*second].id;
    cert.pivot_independent = *gamma2 == *gamma;
  }
  for (std::size_t i = 0; i < battery.size(); ++i) {
    BatteryEntry e{battery[i].id, battery[i].j, zs[i].z * *gamma, zs[i].dual};
    e.equal = e.lhs == e.rhs;
    cert.battery.push_back(std::move(e));
  }
  return cert;
}

}  // namespace detail

/// Gamma factor of the representation whose Whittaker functions make up the
/// battery.  Over a product ring the computation runs per component along the
/// primitive idempotents and gamma is reassembled.
inline GammaCertificate gamma_factor(const std::vector<BatteryMember>& battery, const ZetaOptions& opt = {},
                                     bool concurrent = true) {
  if (battery.empty()) throw ContractError("empty battery");
  const RingPtr& R = battery.front().W.ring();
  if (R->kind() != Ring::Kind::Product) return detail::gamma_connected(battery, opt, concurrent);

  const auto& comps = R->components();
  std::vector<GammaCertificate> certs;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const RingMap pr = RingMap::projection(R, i);
    std::vector<BatteryMember> local;
    for (const auto& b : battery) local.push_back({b.id, b.W.base_change(pr), b.j});
    ZetaOptions o = opt;
    if (opt.vol_O) o.vol_O = pr(*opt.vol_O);
    certs.push_back(detail::gamma_connected(local, o, concurrent));
  }
  std::vector<FractionS> gs;
  for (const auto& c : certs) gs.push_back(c.gamma);
  GammaCertificate out{FractionS::assemble(R, gs), certs.front().pivot};
  out.psi_kernel = certs.front().psi_kernel;
  out.pivot_independent = true;
  bool any_second = false;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    out.components.push_back(comps[i]->descriptor() + ": pivot " + certs[i].pivot);
    if (certs[i].second_pivot) {
      any_second = true;
      out.pivot_independent = out.pivot_independent && certs[i].pivot_independent;
    }
  }
  if (any_second) out.second_pivot = "per component";
  for (std::size_t k = 0; k < battery.size(); ++k) {
    std::vector<FractionS> l, r;
    bool eq = true;
    for (const auto& c : certs) {
      l.push_back(c.battery[k].lhs);
      r.push_back(c.battery[k].rhs);
      eq = eq && c.battery[k].equal;
    }
    out.battery.push_back({battery[k].id, battery[k].j, FractionS::assemble(R, l), FractionS::assemble(R, r), eq});
  }
  return out;
}

/// sum over x in p^(1-k) O / p O of psi(-x) rho(n_12(x)) W.  Its Kirillov
/// function is q^k W(diag(a, 1, ...)) on a in 1 + p^k O at valuation 0, so a
/// twist of conductor k gets a zeta integral with unit constant term.
inline Whittaker psi_average(const Whittaker& W, int k) {
  const i64 p = W.p();
  const AdditiveCharacter& psi = *W.psi();
  std::vector<std::pair<Element, Whittaker>> terms;
  const i64 span = ipow(p, k);
  for (i64 x = 0; x < span; ++x) {
    const PAdic px = PAdic(p, x).shifted(1 - k);
    terms.push_back({psi(-px), W.translate(PAdicMatrix::elementary(W.n(), 0, 1, px), "n(" + px.str() + ")")});
  }
  return Whittaker::combination(terms);
}

/// Default battery: the psi-average, torus, upper and lower unipotent
/// translates and w; for n = 3 the members are repeated with j = 1.  Upper
/// unipotents are limited to the depth of psi the ring supports.
inline std::vector<BatteryMember> default_battery(const Whittaker& W, int conductor = 0) {
  const i64 p = W.p();
  const int n = W.n();
  const int depth = W.psi()->depth() - W.kernel_exponent() + 1;  // psi(p^-v O) is available for v < depth
  std::vector<BatteryMember> out;
  auto add = [&](const std::string& id, const PAdicMatrix& h) { out.push_back({id, W.translate(h, id), 0}); };
  const int a = std::max(1, conductor);
  if (a <= W.psi()->depth()) out.push_back({"avg" + std::to_string(a), psi_average(W, a), 0});
  out.push_back({"W", W, 0});
  if (n == 2) {
    for (int k : {-2, -1, 1, 2}) add("diag(p^" + std::to_string(k) + ",1)", PAdicMatrix::torus(p, {k, 0}));
    for (int v = 1; v <= std::max(2, conductor) && v < depth; ++v) {
      add("n(p^-" + std::to_string(v) + ")", PAdicMatrix::elementary(2, 0, 1, PAdic::p_power(p, -v)));
      add("n(-p^-" + std::to_string(v) + ")", PAdicMatrix::elementary(2, 0, 1, -PAdic::p_power(p, -v)));
    }
    for (int v : {-1, 0, 1}) add("nbar(p^" + std::to_string(v) + ")", PAdicMatrix::elementary(2, 1, 0, PAdic::p_power(p, v)));
    add("w", PAdicMatrix::w(p, 2));
    return out;
  }
  for (int k : {-1, 1}) add("diag(p^" + std::to_string(k) + ",1,1)", PAdicMatrix::torus(p, {k, 0, 0}));
  for (int v = 1; v <= std::max(1, conductor) && v < depth; ++v)
    add("n12(p^-" + std::to_string(v) + ")", PAdicMatrix::elementary(3, 0, 1, PAdic::p_power(p, -v)));
  if (depth > 1) add("n23(p^-1)", PAdicMatrix::elementary(3, 1, 2, PAdic::p_power(p, -1)));
  add("nbar21(1)", PAdicMatrix::elementary(3, 1, 0, PAdic(p, 1)));
  add("w", PAdicMatrix::w(p, 3));
  const std::size_t base = out.size();
  for (std::size_t i = 0; i < base; ++i) out.push_back({out[i].id, out[i].W, 1});
  return out;
}

}  // namespace ellgamma
