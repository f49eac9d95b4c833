#pragma once

// Text descriptors for rings, elements, p-adic numbers, matrices, characters,
// Whittaker functions and batteries, e.g.
//   ram(3,6,t^2+t+1,6)   fiber(unram(3,6,2),unram(3,4,2))
//   tilde(translate(spherical(2,1+t), n(x=p^-1)))   tame(c=1,g=t)
// Errors carry the offending position and a caret line.

#include <cctype>

#include "ellgamma/families.hpp"

namespace ellgamma {

class ParseError : public ContractError {
 public:
  ParseError(const std::string& text, std::size_t pos, const std::string& msg)
      : ContractError(format(text, pos, msg)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
  static std::string format(const std::string& text, std::size_t pos, const std::string& msg) {
    return "at position " + std::to_string(pos + 1) + ": " + msg + "\n  " + text + "\n  " +
           std::string(std::min(pos, text.size()), ' ') + "^";
  }
};

/// head(arg, key=arg, ...), or a bare atom.  Tuples "(a,b)" have an empty
/// head and brackets "[a,b]" the head "[".
struct Node {
  std::string head;
  std::string key;
  std::vector<Node> args;
  bool call = false;
  std::size_t pos = 0;

  const Node* arg(const std::string& k) const {
    for (const auto& a : args)
      if (a.key == k) return &a;
    return nullptr;
  }
};

namespace detail {

class NodeParser {
 public:
  explicit NodeParser(std::string text) : s_(std::move(text)) {}

  Node parse() {
    Node n = node();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return n;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(s_, i_, msg); }

 private:
  std::string s_;
  std::size_t i_ = 0;

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  static bool atom_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' && c != '=' &&
           c != '[' && c != ']';
  }

  Node node() {
    skip();
    Node n;
    n.pos = i_;
    if (i_ < s_.size() && s_[i_] == '[') {
      n.head = "[";
      n.call = true;
      list(n, ']');
      return n;
    }
    const std::size_t start = i_;
    while (i_ < s_.size() && atom_char(s_[i_])) ++i_;
    n.head = s_.substr(start, i_ - start);
    skip();
    if (i_ < s_.size() && s_[i_] == '(') {
      n.call = true;
      list(n, ')');
    } else if (n.head.empty()) {
      fail(i_ < s_.size() ? "expected a term" : "unexpected end of input");
    }
    return n;
  }

  void list(Node& n, char close) {
    ++i_;
    skip();
    if (i_ < s_.size() && s_[i_] == close) {
      ++i_;
      return;
    }
    while (true) {
      Node a = node();
      skip();
      if (i_ < s_.size() && s_[i_] == '=') {
        if (a.call) fail("a key must be a plain name");
        ++i_;
        Node v = node();
        v.key = a.head;
        a = std::move(v);
        skip();
      }
      n.args.push_back(std::move(a));
      if (i_ >= s_.size()) fail(std::string("missing '") + close + "'");
      if (s_[i_] == ',') {
        ++i_;
        continue;
      }
      if (s_[i_] == close) {
        ++i_;
        return;
      }
      fail(std::string("expected ',' or '") + close + "'");
    }
  }
};

inline i64 parse_int(const std::string& text, const std::string& full, std::size_t pos) {
  if (text.empty()) throw ParseError(full, pos, "expected an integer");
  std::size_t k = 0;
  i64 v = 0;
  try {
    v = std::stoll(text, &k);
  } catch (const std::exception&) {
    throw ParseError(full, pos, "expected an integer, got '" + text + "'");
  }
  if (k != text.size()) throw ParseError(full, pos + k, "trailing characters in integer '" + text + "'");
  return v;
}

}  // namespace detail

/// Descriptor text with the parsed tree; positions in errors refer to `text`.
struct Descriptor {
  std::string text;
  Node root;

  static Descriptor parse(const std::string& text) { return {text, detail::NodeParser(text).parse()}; }

  [[noreturn]] void fail(const Node& n, const std::string& msg) const { throw ParseError(text, n.pos, msg); }
  i64 integer(const Node& n) const {
    if (n.call) fail(n, "expected an integer");
    return detail::parse_int(n.head, text, n.pos);
  }
  void arity(const Node& n, std::size_t lo, std::size_t hi) const {
    if (n.args.size() < lo || n.args.size() > hi)
      fail(n, n.head + " takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi)) +
                  " arguments, got " + std::to_string(n.args.size()));
  }
};

// ---------------------------------------------------------------------------
// Polynomials in s and t with integer coefficients

namespace detail {

// sum of terms  [+-] c * s^i * t^j  (any order of factors)
struct PolyTerm {
  i64 c = 1;
  int s = 0, t = 0;
};

inline std::vector<PolyTerm> parse_poly(const Descriptor& d, const Node& n) {
  if (n.call) d.fail(n, "expected a polynomial in s and t");
  const std::string& x = n.head;
  std::vector<PolyTerm> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& m) -> void { throw ParseError(d.text, n.pos + i, m); };
  while (i < x.size()) {
    PolyTerm term;
    if (x[i] == '+' || x[i] == '-') {
      if (x[i] == '-') term.c = -1;
      ++i;
    } else if (!out.empty()) {
      fail("expected '+' or '-'");
    }
    bool any = false;
    while (i < x.size() && x[i] != '+' && x[i] != '-') {
      if (any) {
        if (x[i] != '*') fail("expected '*'");
        ++i;
      }
      if (i < x.size() && std::isdigit(static_cast<unsigned char>(x[i]))) {
        std::size_t j = i;
        while (j < x.size() && std::isdigit(static_cast<unsigned char>(x[j]))) ++j;
        term.c *= std::stoll(x.substr(i, j - i));
        i = j;
      } else if (i < x.size() && (x[i] == 's' || x[i] == 't')) {
        const char v = x[i++];
        int e = 1;
        if (i < x.size() && x[i] == '^') {
          ++i;
          std::size_t j = i;
          while (j < x.size() && std::isdigit(static_cast<unsigned char>(x[j]))) ++j;
          if (j == i) fail("expected an exponent");
          e = std::stoi(x.substr(i, j - i));
          i = j;
        }
        (v == 's' ? term.s : term.t) += e;
      } else {
        fail("expected a number, s or t");
      }
      any = true;
    }
    if (!any) fail("empty term");
    out.push_back(term);
  }
  if (out.empty()) d.fail(n, "empty polynomial");
  return out;
}

}  // namespace detail

/// Integers, coefficient lists [c_0,...], polynomials in s and t, and tuples
/// (x, y) for products and fiber products.
inline Element parse_element(const Descriptor& d, const Node& n, const RingPtr& R) {
  if (!n.call) {
    if (R->kind() != Ring::Kind::Local) {
      // integers only
      return R->from_int(d.integer(n));
    }
    Element acc = R->zero();
    for (const auto& term : detail::parse_poly(d, n)) {
      if ((term.s && R->local().f == 1) || (term.t && R->local().e == 1))
        d.fail(n, "generator " + std::string(term.s ? "s" : "t") + " does not exist in " + R->descriptor());
      acc += R->from_int(term.c) * R->gen_s().pow(term.s) * R->gen_t().pow(term.t);
    }
    return acc;
  }
  if (n.head == "[") {
    if (R->kind() != Ring::Kind::Local) d.fail(n, "coefficient lists need a local ring");
    std::vector<i64> c;
    for (const auto& a : n.args) c.push_back(d.integer(a));
    if (c.size() > R->dim()) d.fail(n, "too many coefficients for " + R->descriptor());
    c.resize(R->dim(), 0);
    return R->from_coords(std::move(c));
  }
  if (n.head.empty()) {
    if (R->kind() == Ring::Kind::Local) d.fail(n, "tuples need a product or fiber product ring");
    if (n.args.size() != R->components().size()) d.fail(n, "tuple size does not match " + R->descriptor());
    std::vector<Element> parts;
    for (std::size_t i = 0; i < n.args.size(); ++i) parts.push_back(parse_element(d, n.args[i], R->components()[i]));
    try {
      return R->from_parts(std::move(parts));
    } catch (const ContractError& e) {
      d.fail(n, e.what());
    }
  }
  d.fail(n, "unknown element form '" + n.head + "'");
}

inline Element parse_element(const std::string& text, const RingPtr& R) {
  const Descriptor d = Descriptor::parse(text);
  return parse_element(d, d.root, R);
}

// ---------------------------------------------------------------------------
// Rings

inline RingPtr parse_ring(const Descriptor& d, const Node& n) {
  if (!n.call) d.fail(n, "expected a ring: unram(l,N,f), ram(l,N,g[,f]), prod(...), fiber(...)");
  try {
    if (n.head == "unram") {
      d.arity(n, 3, 3);
      return Ring::make_unramified(d.integer(n.args[0]), static_cast<int>(d.integer(n.args[1])),
                                   static_cast<int>(d.integer(n.args[2])));
    }
    if (n.head == "ram") {
      d.arity(n, 3, 4);
      std::vector<i64> g;
      for (const auto& term : detail::parse_poly(d, n.args[2])) {
        if (term.s) d.fail(n.args[2], "g is a polynomial in t");
        if (static_cast<int>(g.size()) <= term.t) g.resize(term.t + 1, 0);
        g[term.t] += term.c;
      }
      const int f = n.args.size() == 4 ? static_cast<int>(d.integer(n.args[3])) : 1;
      return Ring::make_ramified(d.integer(n.args[0]), static_cast<int>(d.integer(n.args[1])), g, f);
    }
    if (n.head == "prod") {
      std::vector<RingPtr> cs;
      for (const auto& a : n.args) cs.push_back(parse_ring(d, a));
      return Ring::make_product(cs);
    }
    if (n.head == "fiber") {
      d.arity(n, 2, 2);
      return Ring::make_fiber(parse_ring(d, n.args[0]), parse_ring(d, n.args[1]));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ContractError& e) {
    d.fail(n, e.what());
  }
  d.fail(n, "unknown ring '" + n.head + "'");
}

inline RingPtr parse_ring(const std::string& text) {
  const Descriptor d = Descriptor::parse(text);
  return parse_ring(d, d.root);
}

// ---------------------------------------------------------------------------
// p-adic numbers and matrices

/// 0, u, p^k, -p^k, u*p^k, a/b
inline PAdic parse_padic(const Descriptor& d, const Node& n, i64 p) {
  if (n.call) d.fail(n, "expected a p-adic number");
  const std::string& x = n.head;
  if (const auto slash = x.find('/'); slash != std::string::npos) {
    const i64 a = detail::parse_int(x.substr(0, slash), d.text, n.pos);
    const i64 b = detail::parse_int(x.substr(slash + 1), d.text, n.pos + slash + 1);
    if (b == 0) d.fail(n, "zero denominator");
    return PAdic::fraction(p, a, b);
  }
  const auto pp = x.find("p^");
  if (pp == std::string::npos) return PAdic(p, detail::parse_int(x, d.text, n.pos));
  const int k = static_cast<int>(detail::parse_int(x.substr(pp + 2), d.text, n.pos + pp + 2));
  std::string unit = x.substr(0, pp);
  i64 u = 1;
  if (unit == "-") u = -1;
  else if (!unit.empty()) {
    if (unit.back() != '*') d.fail(n, "expected u*p^k");
    unit.pop_back();
    u = detail::parse_int(unit, d.text, n.pos);
  }
  return PAdic(p, u) * PAdic::p_power(p, k);
}

/// n(x), n12(x), n23(x), n13(x), nbar(x), nbar21(x), nbar32(x), nbar31(x),
/// diag(d_1,...,d_n), w, w'.  For n = 2, n and nbar are the only unipotents.
inline PAdicMatrix parse_matrix(const Descriptor& d, const Node& n, i64 p, int dim) {
  if (!n.call) {
    if (n.head == "w") return PAdicMatrix::w(p, dim);
    if (n.head == "w'") return PAdicMatrix::w_prime(p, dim);
    if (n.head == "1" || n.head == "I") return PAdicMatrix::identity(p, dim);
    d.fail(n, "unknown matrix '" + n.head + "'");
  }
  if (n.head == "diag") {
    d.arity(n, static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
    std::vector<PAdic> e;
    for (const auto& a : n.args) e.push_back(parse_padic(d, a, p));
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i].is_zero()) d.fail(n.args[i], "diagonal entries must be nonzero");
    return PAdicMatrix::diag(e);
  }
  static const std::map<std::string, std::pair<int, int>> upper{
      {"n", {0, 1}}, {"n12", {0, 1}}, {"n23", {1, 2}}, {"n13", {0, 2}},
      {"nbar", {1, 0}}, {"nbar21", {1, 0}}, {"nbar32", {2, 1}}, {"nbar31", {2, 0}}};
  const auto it = upper.find(n.head);
  if (it == upper.end()) d.fail(n, "unknown matrix '" + n.head + "'");
  d.arity(n, 1, 1);
  const auto [i, j] = it->second;
  if (std::max(i, j) >= dim) d.fail(n, n.head + " needs n >= 3");
  return PAdicMatrix::elementary(dim, i, j, parse_padic(d, n.args[0], p));
}

// ---------------------------------------------------------------------------
// Characters

/// unram(c=E); tame(c=E, g=E) of conductor 1 with chi(generator) = g;
/// char(c=E, a=K, g=[E,...]) with values at the generators of (Z/p^a)^x.
/// The element reader lets callers parse in one ring and map into another.
using ElementReader = std::function<Element(const Descriptor&, const Node&)>;

inline MultiplicativeCharacter parse_character(const Descriptor& d, const Node& n, i64 p, const ElementReader& el,
                                               const RingPtr& R) {
  if (!n.call) d.fail(n, "expected a character: unram(c=...), tame(c=..., g=...), char(c=..., a=..., g=[...])");
  const Node* c = n.arg("c");
  const Element cv = c ? el(d, *c) : R->one();
  for (const auto& a : n.args)
    if (a.key.empty() || (a.key != "c" && a.key != "g" && a.key != "a")) d.fail(a, "character arguments are c=, a=, g=");
  try {
    if (n.head == "unram") {
      if (n.arg("g") || n.arg("a")) d.fail(n, "unram takes only c=");
      return MultiplicativeCharacter::unramified(cv, p);
    }
    if (n.head == "tame") {
      if (n.arg("a")) d.fail(n, "tame has conductor 1");
      const Node* g = n.arg("g");
      if (!g) d.fail(n, "tame needs g=, the value at a primitive root mod p");
      return MultiplicativeCharacter::from_generators(cv, p, 1, {el(d, *g)});
    }
    if (n.head == "char") {
      const Node* a = n.arg("a");
      const Node* g = n.arg("g");
      if (!a || !g) d.fail(n, "char needs a= and g=");
      std::vector<Element> gens;
      if (g->head == "[") {
        for (const auto& x : g->args) gens.push_back(el(d, x));
      } else {
        gens.push_back(el(d, *g));
      }
      return MultiplicativeCharacter::from_generators(cv, p, static_cast<int>(d.integer(*a)), gens);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ContractError& e) {
    d.fail(n, e.what());
  }
  d.fail(n, "unknown character '" + n.head + "'");
}

// ---------------------------------------------------------------------------
// Whittaker functions

struct RepContext {
  RingPtr base;         // ring the element text refers to
  RingMap into;         // base -> working ring
  AdditiveCharacter psi;  // on the working ring

  Element element(const Descriptor& d, const Node& n) const { return into(parse_element(d, n, base)); }
  MultiplicativeCharacter character(const Descriptor& d, const Node& n) const {
    const ElementReader el = [this](const Descriptor& dd, const Node& nn) { return parse_element(dd, nn, base); };
    return parse_character(d, n, psi.p(), el, base).base_change(into);
  }
};

/// spherical(a_1,...,a_n) (also spherical2, spherical3), gl1(CHI),
/// twist(REP, CHI), translate(REP, MAT), tilde(REP), dual(REP), avg(REP, k),
/// and the largest conductor of any twist seen.
inline Whittaker parse_rep(const Descriptor& d, const Node& n, const RepContext& ctx, int* conductor = nullptr) {
  if (!n.call) d.fail(n, "expected a representation, e.g. spherical(a,b)");
  try {
    if (n.head == "spherical" || n.head == "spherical2" || n.head == "spherical3") {
      const std::size_t want = n.head == "spherical" ? 0 : static_cast<std::size_t>(n.head.back() - '0');
      if (want) d.arity(n, want, want);
      d.arity(n, 2, 3);
      std::vector<Element> a;
      for (const auto& x : n.args) a.push_back(ctx.element(d, x));
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_unit()) d.fail(n.args[i], "Satake parameters must be units");
      return Whittaker::spherical(a, ctx.psi);
    }
    if (n.head == "gl1") {
      d.arity(n, 1, 1);
      const auto chi = ctx.character(d, n.args[0]);
      if (conductor) *conductor = std::max(*conductor, chi.conductor());
      return Whittaker::gl1(chi);
    }
    if (n.head == "twist") {
      d.arity(n, 2, 2);
      const Whittaker W = parse_rep(d, n.args[0], ctx, conductor);
      const auto chi = ctx.character(d, n.args[1]);
      if (conductor) *conductor = std::max(*conductor, chi.conductor());
      return W.twist(chi);
    }
    if (n.head == "translate") {
      d.arity(n, 2, 2);
      const Whittaker W = parse_rep(d, n.args[0], ctx, conductor);
      const Node& m = n.args[1];
      const std::string label = d.text.substr(m.pos, [&] {
        // text span of the matrix argument
        std::size_t depth = 0, i = m.pos;
        for (; i < d.text.size(); ++i) {
          const char c = d.text[i];
          if (c == '(' || c == '[') ++depth;
          if (c == ')' || c == ']') {
            if (depth == 0) break;
            --depth;
          }
          if (c == ',' && depth == 0) break;
        }
        return i - m.pos;
      }());
      return W.translate(parse_matrix(d, m, ctx.psi.p(), W.n()), label);
    }
    if (n.head == "tilde") {
      d.arity(n, 1, 1);
      return parse_rep(d, n.args[0], ctx, conductor).tilde();
    }
    if (n.head == "dual") {
      d.arity(n, 1, 1);
      return dual_whittaker(parse_rep(d, n.args[0], ctx, conductor));
    }
    if (n.head == "avg") {
      d.arity(n, 2, 2);
      const int k = static_cast<int>(d.integer(n.args[1]));
      if (k < 1) d.fail(n.args[1], "avg needs k >= 1");
      return psi_average(parse_rep(d, n.args[0], ctx, conductor), k);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ContractError& e) {
    d.fail(n, e.what());
  }
  d.fail(n, "unknown representation '" + n.head + "'");
}

/// spherical(...) or twist(spherical(...), CHI): the data families work with.
inline PointData parse_point(const Descriptor& d, const Node& n, const RepContext& ctx) {
  if (n.call && n.head == "twist") {
    d.arity(n, 2, 2);
    PointData pt = parse_point(d, n.args[0], ctx);
    if (pt.twist) d.fail(n, "nested twists are not point data");
    pt.twist = ctx.character(d, n.args[1]);
    return pt;
  }
  if (!n.call || n.head.rfind("spherical", 0) != 0) d.fail(n, "point data are spherical(...) or twist(spherical(...), CHI)");
  PointData pt;
  for (const auto& x : n.args) pt.satake.push_back(ctx.element(d, x));
  if (pt.satake.size() < 2 || pt.satake.size() > 3) d.fail(n, "spherical takes 2 or 3 parameters");
  for (std::size_t i = 0; i < pt.satake.size(); ++i)
    if (!pt.satake[i].is_unit()) d.fail(n.args[i], "Satake parameters must be units");
  return pt;
}

// ---------------------------------------------------------------------------
// Batteries and windows

/// "default", or members separated by ';': W, avg(k), or a matrix M meaning
/// rho(M) W; a suffix @j selects the zeta index.
inline std::vector<BatteryMember> parse_battery(const std::string& text, const Whittaker& W, int conductor) {
  auto trim = [](std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
  };
  if (trim(text) == "default" || trim(text).empty()) return default_battery(W, conductor);
  std::vector<BatteryMember> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    std::string item = trim(text.substr(start, end - start));
    int j = 0;
    if (const auto at = item.rfind('@'); at != std::string::npos) {
      j = static_cast<int>(detail::parse_int(item.substr(at + 1), text, start + at + 1));
      item = trim(item.substr(0, at));
    }
    if (item.empty()) throw ParseError(text, start, "empty battery member");
    try {
      if (item == "W") {
        out.push_back({"W", W, j});
      } else {
        const Descriptor d = Descriptor::parse(item);
        if (d.root.call && d.root.head == "avg") {
          d.arity(d.root, 1, 1);
          out.push_back({item, psi_average(W, static_cast<int>(d.integer(d.root.args[0]))), j});
        } else {
          out.push_back({item, W.translate(parse_matrix(d, d.root, W.p(), W.n()), item), j});
        }
      }
    } catch (const ParseError& e) {
      throw ParseError(text, start + e.position(), std::string(e.what()).substr(0, std::string(e.what()).find('\n')));
    }
    start = end + 1;
  }
  return out;
}

/// lo..hi
inline std::pair<int, int> parse_window(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ParseError(text, 0, "expected lo..hi");
  const int lo = static_cast<int>(detail::parse_int(text.substr(0, dots), text, 0));
  const int hi = static_cast<int>(detail::parse_int(text.substr(dots + 2), text, dots + 2));
  if (hi < lo) throw ParseError(text, dots + 2, "window end precedes its start");
  return {lo, hi};
}

}  // namespace ellgamma
