#pragma once

// Whittaker functions W: GL_n(Q_p) -> A as evaluator trees, and the torus
// streams b_m = int_U W(diag(p^m a, 1, ..., 1)) d^x a that feed the zeta
// integrals.
//
// Conventions.  psi has kernel p^c (c = 1 by default).  The spherical
// function for Satake data alpha is W(g) = W_K(g t0), where W_K is the
// GL_n(Z_p)-fixed Jacquet integral and t0 = diag(p^(n-1), ..., p, 1); with
// ker psi = p the function W_K vanishes at 1, and the shift by t0 moves its
// support to the dominant cone.  W(1) = 1 and
//   W(n p^lambda k') = psi(n) q^(-sum (n-i) lambda_i) s_lambda(alpha)
// for dominant lambda (s_lambda the Schur polynomial), 0 otherwise, where k'
// ranges over t0 GL_n(Z_p) t0^-1.

#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ellgamma/laurent.hpp"
#include "ellgamma/padic.hpp"

namespace ellgamma {

enum class DepthKind { Nilpotent, Idempotent };

class Whittaker;

namespace detail {

struct WNode {
  virtual ~WNode() = default;
  virtual Element eval(const PAdicMatrix& g) const = 0;
  /// Smallest d with rho(I + yE)W = W whenever v(y) >= d (an upper bound is
  /// acceptable).  E is nilpotent with E^2 = 0, or a rank one idempotent.
  virtual int depth(const PAdicMatrix& E, DepthKind kind) const = 0;
  /// Roots rho_i of the weighted stream q^((n-1)m) b_m.
  virtual std::vector<Element> roots() const = 0;
  virtual std::string descriptor() const = 0;
  virtual std::shared_ptr<const WNode> base_change(const RingMap& phi) const = 0;
  /// Only needed for n = 1, where no unipotent forces a floor.
  virtual std::optional<int> gl1_floor() const { return std::nullopt; }
  int n = 0;
  RingPtr ring;
  i64 p = 0;
  const AdditiveCharacter* psi = nullptr;  // owned by a spherical leaf
};

inline int min_valuation(const PAdicMatrix& m) {
  int best = PAdic::kInf;
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.n(); ++j) {
      const PAdic& x = m(i, j);
      if (x.is_exact_zero()) continue;
      best = std::min(best, x.is_zero() ? x.valuation_lower_bound() : x.valuation());
    }
  return best;
}

// Leibniz determinant for small matrices over a ring.
inline Element small_det(const std::vector<std::vector<Element>>& a, const RingPtr& R) {
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Element acc = R->zero();
  do {
    int inv = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inv;
    Element t = R->one();
    for (int i = 0; i < n; ++i) t *= a[i][perm[i]];
    acc = inv % 2 ? acc - t : acc + t;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

class SphericalNode : public WNode {
 public:
  SphericalNode(std::vector<Element> alpha, AdditiveCharacter psi_in)
      : alpha_(std::move(alpha)), psi_(std::move(psi_in)) {
    n = static_cast<int>(alpha_.size());
    ring = psi_.ring();
    p = psi_.p();
    psi = &psi_;
    if (n < 2 || n > 3) throw ContractError("spherical Whittaker functions are provided for n = 2, 3");
    for (const auto& a : alpha_) {
      if (!same_ring(a.ring(), ring)) throw RingMismatch("Satake parameter outside the coefficient ring");
      if (!a.is_unit()) throw ContractError("Satake parameters must be units");
    }
    // elementary symmetric functions for the h_k recurrence
    e_ = {ring->one()};
    for (const auto& a : alpha_) {
      std::vector<Element> next(e_.size() + 1, ring->zero());
      for (std::size_t k = 0; k < e_.size(); ++k) {
        next[k] += e_[k];
        next[k + 1] += e_[k] * a;
      }
      e_ = std::move(next);
    }
    t0_ = PAdicMatrix::identity(p, n);
    for (int i = 0; i < n; ++i) t0_(i, i) = PAdic::p_power(p, n - 1 - i);
    t0inv_ = t0_.inverse();
    q_ = ring->from_int(p);
    qinv_ = *q_.inverse();
  }

  Element eval(const PAdicMatrix& g) const override {
    const Iwasawa d = iwasawa_decompose(g * t0_);
    std::vector<int> lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = d.t(i, i).valuation() - (n - 1 - i);
    for (int i = 0; i + 1 < n; ++i)
      if (lambda[i] < lambda[i + 1]) return ring->zero();
    PAdic s = PAdic::zero(p);
    for (int i = 0; i + 1 < n; ++i) s = s + d.n(i, i + 1);
    return torus_value(lambda) * psi_(s);
  }

  /// q^(-sum (n-i) lambda_i) s_lambda(alpha) for dominant lambda.
  Element torus_value(const std::vector<int>& lambda) const {
    int wt = 0;
    for (int i = 0; i < n; ++i) wt += (n - 1 - i) * lambda[i];
    return qinv_.pow_signed(wt) * schur(lambda);
  }

  Element schur(const std::vector<int>& lambda) const {
    const int shift = lambda[n - 1];
    std::vector<std::vector<Element>> m(n, std::vector<Element>(n, ring->zero()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = h(lambda[i] - shift - i + j);
    return e_[n].pow_signed(shift) * small_det(m, ring);
  }

  Element h(int k) const {
    if (k < 0) return ring->zero();
    std::lock_guard<std::mutex> lock(mu_);
    if (hcache_.empty()) hcache_.push_back(ring->one());
    while (static_cast<int>(hcache_.size()) <= k) {
      const int m = static_cast<int>(hcache_.size());
      Element acc = ring->zero();
      for (int i = 1; i <= std::min(m, n); ++i) {
        const Element t = e_[i] * hcache_[m - i];
        acc = i % 2 ? acc + t : acc - t;
      }
      hcache_.push_back(acc);
    }
    return hcache_[k];
  }

  int depth(const PAdicMatrix& E, DepthKind kind) const override {
    const int mv = min_valuation(t0inv_ * E * t0_);
    if (mv >= PAdic::kInf) return -PAdic::kInf;
    return kind == DepthKind::Nilpotent ? -mv : std::max(1, -mv);
  }
  std::vector<Element> roots() const override { return alpha_; }
  std::string descriptor() const override {
    std::string s = "spherical" + std::to_string(n) + "(";
    for (int i = 0; i < n; ++i) s += (i ? "," : "") + alpha_[i].str();
    return s + ")";
  }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    std::vector<Element> a;
    for (const auto& x : alpha_) a.push_back(phi(x));
    return std::make_shared<SphericalNode>(std::move(a), psi_.base_change(phi));
  }
  const std::vector<Element>& alpha() const { return alpha_; }

 private:
  std::vector<Element> alpha_;
  AdditiveCharacter psi_;
  std::vector<Element> e_;
  PAdicMatrix t0_, t0inv_;
  Element q_, qinv_;
  mutable std::mutex mu_;
  mutable std::vector<Element> hcache_;
};

/// GL_1: W(a) = chi(a) on Z_p - {0}, zero elsewhere.
class GL1Node : public WNode {
 public:
  explicit GL1Node(MultiplicativeCharacter chi) : chi_(std::move(chi)) {
    n = 1;
    ring = chi_.ring();
    p = chi_.p();
  }
  Element eval(const PAdicMatrix& g) const override {
    const PAdic& a = g(0, 0);
    if (a.valuation() < 0) return ring->zero();
    return chi_(a);
  }
  int depth(const PAdicMatrix&, DepthKind) const override { return std::max(1, chi_.conductor()); }
  std::vector<Element> roots() const override { return {chi_.value_at_pi()}; }
  std::string descriptor() const override { return "gl1(" + chi_.str() + ")"; }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    return std::make_shared<GL1Node>(chi_.base_change(phi));
  }
  std::optional<int> gl1_floor() const override { return 0; }
  const MultiplicativeCharacter& chi() const { return chi_; }

 private:
  MultiplicativeCharacter chi_;
};

class TwistNode : public WNode {
 public:
  TwistNode(std::shared_ptr<const WNode> inner, MultiplicativeCharacter chi)
      : inner_(std::move(inner)), chi_(std::move(chi)) {
    if (!same_ring(chi_.ring(), inner_->ring)) throw RingMismatch("twist character over another ring");
    n = inner_->n;
    ring = inner_->ring;
    p = inner_->p;
    psi = inner_->psi;
  }
  Element eval(const PAdicMatrix& g) const override { return chi_(g.det()) * inner_->eval(g); }
  int depth(const PAdicMatrix& E, DepthKind kind) const override {
    const int d = inner_->depth(E, kind);
    return kind == DepthKind::Nilpotent ? d : std::max(d, std::max(1, chi_.conductor()));
  }
  std::vector<Element> roots() const override {
    auto r = inner_->roots();
    for (auto& x : r) x *= chi_.value_at_pi();
    return r;
  }
  std::string descriptor() const override { return "twist(" + inner_->descriptor() + ", " + chi_.str() + ")"; }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    return std::make_shared<TwistNode>(inner_->base_change(phi), chi_.base_change(phi));
  }
  std::optional<int> gl1_floor() const override { return inner_->gl1_floor(); }

 private:
  std::shared_ptr<const WNode> inner_;
  MultiplicativeCharacter chi_;
};

class TranslateNode : public WNode {
 public:
  TranslateNode(std::shared_ptr<const WNode> inner, PAdicMatrix h, std::string label)
      : inner_(std::move(inner)), h_(std::move(h)), hinv_(h_.inverse()), label_(std::move(label)) {
    if (h_.n() != inner_->n) throw ContractError("translation matrix has the wrong size");
    n = inner_->n;
    ring = inner_->ring;
    p = inner_->p;
    psi = inner_->psi;
  }
  Element eval(const PAdicMatrix& g) const override { return inner_->eval(g * h_); }
  int depth(const PAdicMatrix& E, DepthKind kind) const override { return inner_->depth(hinv_ * E * h_, kind); }
  std::vector<Element> roots() const override { return inner_->roots(); }
  std::string descriptor() const override { return "translate(" + inner_->descriptor() + ", " + label_ + ")"; }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    return std::make_shared<TranslateNode>(inner_->base_change(phi), h_, label_);
  }
  std::optional<int> gl1_floor() const override {
    auto f = inner_->gl1_floor();
    if (!f) return f;
    return *f - h_(0, 0).valuation();
  }

 private:
  std::shared_ptr<const WNode> inner_;
  PAdicMatrix h_, hinv_;
  std::string label_;
};

class TildeNode : public WNode {
 public:
  explicit TildeNode(std::shared_ptr<const WNode> inner) : inner_(std::move(inner)) {
    n = inner_->n;
    ring = inner_->ring;
    p = inner_->p;
    psi = inner_->psi;
    w_ = PAdicMatrix::w(p, n);
  }
  Element eval(const PAdicMatrix& g) const override { return inner_->eval(w_ * g.iota()); }
  int depth(const PAdicMatrix& E, DepthKind kind) const override { return inner_->depth(E.transpose(), kind); }
  std::vector<Element> roots() const override {
    auto r = inner_->roots();
    const Element qn1 = ring->from_int(ipow(p, n - 1));
    for (auto& x : r) x = qn1 * *x.inverse();
    return r;
  }
  std::string descriptor() const override { return "tilde(" + inner_->descriptor() + ")"; }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    return std::make_shared<TildeNode>(inner_->base_change(phi));
  }

 private:
  std::shared_ptr<const WNode> inner_;
  PAdicMatrix w_;
};

class CombinationNode : public WNode {
 public:
  explicit CombinationNode(std::vector<std::pair<Element, std::shared_ptr<const WNode>>> terms)
      : terms_(std::move(terms)) {
    if (terms_.empty()) throw ContractError("empty linear combination");
    const auto& f = terms_.front().second;
    n = f->n;
    ring = f->ring;
    p = f->p;
    psi = f->psi;
    for (const auto& [c, w] : terms_)
      if (w->n != n || !same_ring(w->ring, ring) || !same_ring(c.ring(), ring))
        throw ContractError("linear combination of incompatible Whittaker functions");
  }
  Element eval(const PAdicMatrix& g) const override {
    Element acc = ring->zero();
    for (const auto& [c, w] : terms_)
      if (!c.is_zero()) acc += c * w->eval(g);
    return acc;
  }
  int depth(const PAdicMatrix& E, DepthKind kind) const override {
    int d = -PAdic::kInf;
    for (const auto& [c, w] : terms_) d = std::max(d, w->depth(E, kind));
    return d;
  }
  std::vector<Element> roots() const override { return terms_.front().second->roots(); }
  std::string descriptor() const override {
    std::string s = "sum(";
    for (std::size_t i = 0; i < terms_.size(); ++i)
      s += (i ? " + " : "") + terms_[i].first.str() + "*" + terms_[i].second->descriptor();
    return s + ")";
  }
  std::shared_ptr<const WNode> base_change(const RingMap& phi) const override {
    std::vector<std::pair<Element, std::shared_ptr<const WNode>>> t;
    for (const auto& [c, w] : terms_) t.emplace_back(phi(c), w->base_change(phi));
    return std::make_shared<CombinationNode>(std::move(t));
  }
  std::optional<int> gl1_floor() const override {
    std::optional<int> f;
    for (const auto& [c, w] : terms_) {
      auto g = w->gl1_floor();
      if (!g) return std::nullopt;
      f = f ? std::min(*f, *g) : *g;
    }
    return f;
  }

 private:
  std::vector<std::pair<Element, std::shared_ptr<const WNode>>> terms_;
};

}  // namespace detail

/// Immutable handle on an evaluator tree.
class Whittaker {
 public:
  static Whittaker spherical(std::vector<Element> alpha, const AdditiveCharacter& psi) {
    return Whittaker(std::make_shared<detail::SphericalNode>(std::move(alpha), psi));
  }
  static Whittaker gl1(const MultiplicativeCharacter& chi) {
    return Whittaker(std::make_shared<detail::GL1Node>(chi));
  }
  static Whittaker combination(const std::vector<std::pair<Element, Whittaker>>& terms) {
    std::vector<std::pair<Element, std::shared_ptr<const detail::WNode>>> t;
    for (const auto& [c, w] : terms) t.emplace_back(c, w.node_);
    return Whittaker(std::make_shared<detail::CombinationNode>(std::move(t)));
  }

  /// rho(h)W: g -> W(g h).
  Whittaker translate(const PAdicMatrix& h, std::string label = "") const {
    if (label.empty()) label = h.str();
    return Whittaker(std::make_shared<detail::TranslateNode>(node_, h, std::move(label)));
  }
  /// g -> chi(det g) W(g).
  Whittaker twist(const MultiplicativeCharacter& chi) const {
    return Whittaker(std::make_shared<detail::TwistNode>(node_, chi));
  }
  /// g -> W(w g^iota).
  Whittaker tilde() const { return Whittaker(std::make_shared<detail::TildeNode>(node_)); }
  Whittaker base_change(const RingMap& phi) const { return Whittaker(node_->base_change(phi)); }

  Element operator()(const PAdicMatrix& g) const {
    if (g.n() != n()) throw ContractError("evaluation matrix has the wrong size");
    return node_->eval(g);
  }
  int n() const { return node_->n; }
  i64 p() const { return node_->p; }
  const RingPtr& ring() const { return node_->ring; }
  const AdditiveCharacter* psi() const { return node_->psi; }
  int kernel_exponent() const { return psi() ? psi()->kernel_exponent() : 1; }
  std::string descriptor() const { return node_->descriptor(); }
  std::vector<Element> roots() const { return node_->roots(); }

  int depth(const PAdicMatrix& E, DepthKind kind) const { return node_->depth(E, kind); }
  /// depth along E_ij (nilpotent for i != j, idempotent for i == j).
  int depth(int i, int j) const {
    PAdicMatrix E(p(), n());
    E(i, j) = PAdic(p(), 1);
    return depth(E, i == j ? DepthKind::Idempotent : DepthKind::Nilpotent);
  }
  /// W(diag(a, 1, ..., 1)) = 0 whenever v(a) < support_floor().
  int support_floor() const {
    if (n() == 1) {
      auto f = node_->gl1_floor();
      if (!f) throw ContractError("no support floor is known for this GL_1 function");
      return *f;
    }
    return kernel_exponent() - depth(0, 1);
  }
  /// Resolution c such that a -> W(diag(p^m a, 1, ...)) is constant on U^(c)-cosets.
  int unit_resolution() const { return std::max(1, depth(0, 0)); }

 private:
  explicit Whittaker(std::shared_ptr<const detail::WNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::WNode> node_;
};

/// diag(p^m u, 1, ..., 1)
inline PAdicMatrix torus_point(i64 p, int n, int m, i64 u) {
  PAdicMatrix g = PAdicMatrix::identity(p, n);
  g(0, 0) = PAdic(p, u).shifted(m);
  return g;
}

struct StreamOptions {
  int window = 8;       // explicit terms before the tail is looked for
  int margin = 8;       // extra terms on which the tail recurrence is verified
  int max_window = 96;  // window doubling stops here
};

/// Coefficients of prod (1 - r_i X) as the recurrence b_m = sum a_k b_{m-k}.
inline std::vector<Element> recurrence_from_roots(const RingPtr& R, const std::vector<Element>& roots) {
  LaurentPoly P = LaurentPoly::constant(R->one());
  for (const auto& r : roots) P = P * LaurentPoly::one_minus(R, {r});
  std::vector<Element> a;
  for (int k = 1; k <= static_cast<int>(roots.size()); ++k) a.push_back(-P.coeff(k));
  return a;
}

/// b_m for m in [lo, hi] at unit resolution c.
inline std::vector<Element> torus_values(const Whittaker& W, int lo, int hi, int c) {
  const i64 p = W.p();
  std::vector<Element> out;
  for (int m = lo; m <= hi; ++m)
    out.push_back(integrate_units([&](i64 u) { return W(torus_point(p, W.n(), m, u)); }, W.ring(), p, c));
  return out;
}

/// Builds a RecurrentStream from a value provider: explicit terms from the
/// floor, the declared recurrence, and a tail start found by scanning the
/// window; the window doubles until `margin` verified terms follow the tail.
inline RecurrentStream assemble_stream(const RingPtr& R, int floor, std::vector<Element> rec,
                                       const std::function<std::vector<Element>(int, int)>& values,
                                       const StreamOptions& opt) {
  std::vector<Element> vals;
  int len = opt.window;
  while (true) {
    const int hi = floor + len + opt.margin - 1;
    const int have = floor + static_cast<int>(vals.size()) - 1;
    if (hi > have) {
      auto more = values(have + 1, hi);
      vals.insert(vals.end(), more.begin(), more.end());
    }
    RecurrentStream s{R, floor, vals, floor, rec};
    int last_bad = floor - 1;
    for (int m = floor; m <= hi; ++m) {
      Element acc = R->zero();
      for (std::size_t i = 0; i < rec.size(); ++i) acc += rec[i] * s.at(m - 1 - static_cast<int>(i));
      if (!(acc == s.at(m))) last_bad = m;
    }
    s.tail_start = last_bad + 1;
    if (hi - s.tail_start + 1 >= opt.margin) return s;
    if (len >= opt.max_window)
      throw VerificationError("declared tail recurrence not reached within a window of " + std::to_string(len));
    len *= 2;
  }
}

/// The stream b_m of W with its floor and the recurrence of roots / q^(n-1).
inline RecurrentStream torus_stream(const Whittaker& W, const StreamOptions& opt = {},
                                    std::optional<int> resolution = std::nullopt) {
  const RingPtr& R = W.ring();
  const int c = resolution ? *resolution : W.unit_resolution();
  const Element qn1inv = *R->from_int(ipow(W.p(), W.n() - 1)).inverse();
  std::vector<Element> roots = W.roots();
  for (auto& r : roots) r *= qn1inv;
  return assemble_stream(R, W.support_floor(), recurrence_from_roots(R, roots),
                         [&](int lo, int hi) { return torus_values(W, lo, hi, c); }, opt);
}

}  // namespace ellgamma
