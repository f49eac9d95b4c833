#pragma once

// Command-line front end.  run_cli parses, runs one subcommand, writes the
// report and returns the exit status: 0 ok, 1 verified-false, 2 contract or
// parse error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ellgamma/report.hpp"

namespace ellgamma::cli {

constexpr int kOk = 0;
constexpr int kFalse = 1;
constexpr int kContract = 2;

inline bool is_prime(i64 p) {
  if (p < 2) return false;
  for (i64 d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

/// The ring the computation runs in: the given one, or an unramified
/// enlargement holding mu_(p^D).  D is the requested psi depth, or the largest
/// of 3, 2, 1 whose enlargement has dimension at most 12.
struct Working {
  RingPtr base;
  RingMap into;
  std::string note;
  const RingPtr& ring() const { return into.target(); }
};

inline Working working_ring(const RingPtr& base, i64 p, int want_depth) {
  if (!is_prime(p)) throw ContractError("p = " + std::to_string(p) + " is not prime");
  if (p == base->ell()) throw ContractError("p must differ from ell (banal coefficient characteristic)");
  if (base->kind() != Ring::Kind::Local) return {base, RingMap::identity(base), ""};
  const auto& L = base->local();
  auto degree_for = [&](int D) {
    const i64 pd = ipow(p, D);
    int f2 = L.f;
    while (detail::pow_mod(L.ell, static_cast<u128>(f2), pd) != 1 % pd) {
      f2 += L.f;
      if (f2 > 400) return 401;
    }
    return f2;
  };
  int D = want_depth;
  if (D <= 0) {
    D = 1;
    for (int d : {3, 2})
      if (degree_for(d) * L.e <= 12) {
        D = d;
        break;
      }
  }
  if (degree_for(D) > 400) throw ContractError("mu_" + std::to_string(ipow(p, D)) + " needs residue degree above 400");
  auto [R, phi] = required_cyclotomic_extension(base, D, p);
  std::string note;
  if (!same_ring(R, base)) note = base->descriptor() + " enlarged to " + R->descriptor() + " for mu_" + std::to_string(ipow(p, D));
  return {base, phi, note};
}

struct Common {
  std::string ring;
  i64 p = 0;
  int psi_depth = 0;
  std::string output;
  std::string format = "all";
  int precision = 0;
  int margin = 0;
};

inline ZetaOptions zeta_options(const Common& c) {
  ZetaOptions o;
  if (c.margin > 0) o.stream.margin = c.margin;
  return o;
}

inline void apply_precision(const Common& c) {
  if (c.precision <= 0) return;
  if (c.p > 0) {
    i64 m = 1;
    for (int i = 0; i < c.precision; ++i) {
      if (m > (i64{1} << 40) / c.p) throw ContractError("p^precision exceeds 2^40");
      m *= c.p;
    }
  }
  set_default_precision(c.precision);
}

inline RepContext context(const Working& w, i64 p) {
  return {w.base, w.into, AdditiveCharacter::make(w.ring(), p)};
}

inline void describe_ring(Report& r, const Working& w, i64 p) {
  r.field("ring", w.base->descriptor());
  r.field("working_ring", w.ring()->descriptor());
  if (!w.note.empty()) r.field("note", w.note);
  r.field("p", static_cast<long long>(p));
}

// ---------------------------------------------------------------------------
// Subcommands

inline Report cmd_zeta(const Common& c, const std::string& rep, int j, const std::string& window) {
  const auto [lo, hi] = parse_window(window);
  const Working w = working_ring(parse_ring(c.ring), c.p, c.psi_depth);
  const Descriptor d = Descriptor::parse(rep);
  const Whittaker W = parse_rep(d, d.root, context(w, c.p));
  const ZetaResult z = zeta_integral(W, j, zeta_options(c));
  Report r("zeta");
  describe_ring(r, w, c.p);
  r.field("rep", W.descriptor());
  r.field("j", j);
  r.field("zeta", z.value.pretty());
  r.field("zeta_raw", z.value.str());
  const auto& den = z.value.denominator();
  const bool in_s = den.first().is_unit() && den.last().is_unit();
  r.field("denominator_in_S", in_s);
  r.field("stream_floor", z.stream.floor);
  r.field("tail_start", z.stream.tail_start);
  if (j > 0) {
    r.field("x_window", z.x_window);
    r.field("x_resolution", z.x_resolution);
  }
  std::vector<std::vector<std::string>> rows;
  const auto coeffs = z.value.expand(lo, hi);
  for (int m = lo; m <= hi; ++m) rows.push_back({std::to_string(m), coeffs[m - lo].str()});
  r.table("coefficients", {"m", "coeff"}, std::move(rows));
  r.status(in_s && z.recurrence_verified);
  return r;
}

inline Report cmd_gamma(const Common& c, const std::string& rep, const std::string& battery, int conductor,
                        bool strict, const std::string& name) {
  const Working w = working_ring(parse_ring(c.ring), c.p, c.psi_depth);
  const Descriptor d = Descriptor::parse(rep);
  int seen = 0;
  const Whittaker W = parse_rep(d, d.root, context(w, c.p), &seen);
  const int a = conductor >= 0 ? conductor : seen;
  const auto members = parse_battery(battery, W, a);
  const GammaCertificate cert = gamma_factor(members, zeta_options(c));
  Report r(name);
  describe_ring(r, w, c.p);
  r.field("rep", W.descriptor());
  r.field("conductor", a);
  add_certificate(r, cert);
  bool ok = cert.verified();
  if (strict) ok = ok && cert.second_pivot && cert.pivot_independent;
  r.status(ok);
  return r;
}

inline Report cmd_lfactor(const Common& c, const std::string& chi_text, const std::string& window) {
  const auto [lo, hi] = parse_window(window);
  const RingPtr R = parse_ring(c.ring);
  const Descriptor d = Descriptor::parse(chi_text);
  const ElementReader el = [&](const Descriptor& dd, const Node& n) { return parse_element(dd, n, R); };
  const auto chi = parse_character(d, d.root, c.p, el, R);
  const FractionS L = l_factor_gl1(chi);
  Report r("lfactor");
  r.field("ring", R->descriptor());
  r.field("p", static_cast<long long>(c.p));
  r.field("chi", chi_text);
  r.field("conductor", chi.conductor());
  r.field("chi_p", chi.value_at_pi().str());
  r.field("L", L.pretty());
  r.field("L_raw", L.str());
  std::vector<std::vector<std::string>> rows;
  const auto coeffs = L.expand(lo, hi);
  for (int m = lo; m <= hi; ++m) rows.push_back({std::to_string(m), coeffs[m - lo].str()});
  r.table("coefficients", {"m", "coeff"}, std::move(rows));
  return r;
}

inline Report cmd_nointerp(i64 ell, i64 p, int N, const std::string& c_text) {
  std::optional<Element> cval;
  if (!c_text.empty()) cval = parse_element(c_text, cyclotomic_ring(ell, N));
  const Obstruction ob = nointerp_demo(ell, p, cval, N);
  Report r("nointerp");
  r.field("ring", ob.ring->descriptor());
  r.field("l", static_cast<long long>(ell));
  r.field("p", static_cast<long long>(p));
  r.field("chi1", "unramified, chi1(p) = " + ob.chi1.value_at_pi().str());
  r.field("chi2", "tame of order " + std::to_string(ell) + ", chi2(p) = " + ob.chi2.value_at_pi().str());
  r.field("L1", ob.L1.pretty());
  r.field("L2", ob.L2.pretty());
  r.field("L1_mod_m", ob.L1_bar.pretty());
  r.field("L2_mod_m", ob.L2_bar.pretty());
  r.field("obstruction", true);
  r.field("mismatch_degree", ob.degree);
  r.field("mismatch_L1", ob.lhs.str());
  r.field("mismatch_L2", ob.rhs.str());
  return r;
}

inline Report cmd_congruence(const Common& c, const std::string& rep1, const std::string& rep2) {
  const Working w = working_ring(parse_ring(c.ring), c.p, c.psi_depth);
  const RepContext ctx = context(w, c.p);
  const Descriptor d1 = Descriptor::parse(rep1), d2 = Descriptor::parse(rep2);
  const PointData a = parse_point(d1, d1.root, ctx), b = parse_point(d2, d2.root, ctx);
  const CongruenceReport rep = congruence_check(a, b, c.p, zeta_options(c));
  Report r("congruence");
  describe_ring(r, w, c.p);
  r.field("rep", rep1);
  r.field("rep2", rep2);
  r.field("gamma", rep.a.gamma.pretty());
  r.field("gamma2", rep.b.gamma.pretty());
  r.field("gamma_mod_m", rep.gamma_a_bar.pretty());
  r.field("gamma2_mod_m", rep.gamma_b_bar.pretty());
  r.field("verified", rep.a.verified() && rep.b.verified());
  r.field("gamma_congruent", rep.gamma_congruent);
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, ok] : rep.terms) rows.push_back({id, ok ? "congruent" : "DIFFERENT"});
  r.table("terms", {"member", "mod_m"}, std::move(rows));
  r.status(rep.congruent() && rep.a.verified() && rep.b.verified());
  return r;
}

/// Plain-text family file:
///   [point1]  ring = ...  rep = ...
///   [point2]  ring = ...  rep = ...
///   [glue]    p = ...
/// Blank lines and lines starting with '#' are ignored.
struct FamilyFile {
  std::map<std::string, std::map<std::string, std::string>> blocks;

  static FamilyFile read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot read family file " + path);
    FamilyFile f;
    std::string line, block;
    int no = 0;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
      ++no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ContractError(path + ":" + std::to_string(no) + ": unterminated block header");
        block = trim(line.substr(1, line.size() - 2));
        f.blocks[block];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ContractError(path + ":" + std::to_string(no) + ": expected key = value");
      if (block.empty()) throw ContractError(path + ":" + std::to_string(no) + ": key outside a block");
      f.blocks[block][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return f;
  }

  std::string get(const std::string& block, const std::string& key) const {
    const auto b = blocks.find(block);
    if (b == blocks.end()) throw ContractError("family file has no [" + block + "] block");
    const auto k = b->second.find(key);
    if (k == b->second.end()) throw ContractError("[" + block + "] has no " + key);
    return k->second;
  }
};

inline Report cmd_specialize(Common c, const std::string& family, std::vector<std::string> rings,
                             std::vector<std::string> reps) {
  if (!family.empty()) {
    const FamilyFile f = FamilyFile::read(family);
    rings = {f.get("point1", "ring"), f.get("point2", "ring")};
    reps = {f.get("point1", "rep"), f.get("point2", "rep")};
    const std::string p = f.get("glue", "p");
    c.p = detail::parse_int(p, p, 0);
  }
  if (rings.size() != 2 || reps.size() != 2) throw ContractError("specialize needs two points: --family, or --ring1/--rep1 and --ring2/--rep2");
  std::vector<PointData> pts;
  std::vector<std::string> notes;
  for (int i = 0; i < 2; ++i) {
    const Working w = working_ring(parse_ring(rings[i]), c.p, c.psi_depth);
    if (!w.note.empty()) notes.push_back(w.note);
    const Descriptor d = Descriptor::parse(reps[i]);
    pts.push_back(parse_point(d, d.root, context(w, c.p)));
  }
  const FamilyDescriptor F = FamilyDescriptor::glue(pts[0], pts[1]);
  const SpecializationReport rep = specialize_gamma(F, c.p, zeta_options(c));
  Report r("specialize");
  r.field("family_ring", F.ring->descriptor());
  for (std::size_t i = 0; i < notes.size(); ++i) r.field("note." + std::to_string(i), notes[i]);
  r.field("p", static_cast<long long>(c.p));
  r.field("point1", reps[0]);
  r.field("point2", reps[1]);
  r.field("gamma_family", rep.family.gamma.pretty());
  r.field("family_verified", rep.family.verified());
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const std::string k = std::to_string(i + 1);
    r.field("gamma_point" + k, rep.points[i].gamma.pretty());
    r.field("point" + k + "_verified", rep.points[i].verified());
    r.field("f" + k + "(gamma_family)=gamma_point" + k, static_cast<bool>(rep.match[i]));
  }
  r.field("residue_routes_agree", rep.residue_consistent);
  r.status(rep.ok());
  return r;
}

// ---------------------------------------------------------------------------

inline int emit(const Report& r, const Common& c, std::ostream& out) {
  const std::string text = r.render(c.format);
  out << text;
  if (!c.output.empty()) {
    std::ofstream f(c.output);
    if (!f) throw ContractError("cannot write " + c.output);
    f << text;
  }
  return r.passed() ? kOk : kFalse;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Zeta integrals, L-factors and gamma factors of l-adic families of GL_n(Q_p) representations"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common c;
  app.add_option("--output,-o", c.output, "Also write the report to this file");
  app.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"all", "table", "kv", "json"}));
  app.add_option("--precision", c.precision, "Relative p-adic precision in digits (default: 12, or p^r <= 2^40 for p < 7)");
  app.add_option("--margin", c.margin, "Extra terms on which tail recurrences are verified (default 8)");
  app.add_option("--psi-depth", c.psi_depth, "Require mu_(p^D) in the working ring (default: automatic)");


  std::string rep, rep2, battery = "default", window = "0..7", chi, cval, family;
  std::string ring1, ring2, rep1s, rep2s;
  int j = 0, conductor = -1, N = 6;
  i64 ell = 3, pn = 7;

  auto* zeta = app.add_subcommand("zeta", "Z(W, X; j) as a fraction in S^-1 A[X, X^-1]");
  zeta->add_option("--ring", c.ring, "Coefficient ring, e.g. unram(3,6,2), ram(3,6,t^2+t+1), fiber(...), prod(...)");
  zeta->add_option("--p", c.p, "Residue characteristic of the local field Q_p");
  zeta->add_option("--rep", rep, "Whittaker function, e.g. translate(spherical(2,1), n(x=p^-1))")->required();
  zeta->add_option("--j", j, "Zeta index j in [0, n-2]")->capture_default_str();
  zeta->add_option("--window", window, "Coefficient window lo..hi to print")->capture_default_str();

  auto* gamma = app.add_subcommand("gamma", "Gamma factor from an invertible pivot, checked on a battery");
  auto* fe = app.add_subcommand("verify-fe", "Functional equation on a battery, requiring two independent pivots");
  for (auto* s : {gamma, fe}) {
    s->add_option("--ring", c.ring, "Coefficient ring");
    s->add_option("--p", c.p, "Residue characteristic of the local field Q_p");
    s->add_option("--rep", rep, "Whittaker function, e.g. spherical2(2,1)")->required();
    s->add_option("--battery", battery, "'default' or members 'M[@j]; ...' (M a matrix, W, or avg(k))")->capture_default_str();
    s->add_option("--conductor", conductor, "Conductor used to size the default battery (default: from the twists)");
  }

  auto* lf = app.add_subcommand("lfactor", "L(chi, X) for a character of Q_p^x");
  lf->add_option("--ring", c.ring, "Coefficient ring");
  lf->add_option("--p", c.p, "Residue characteristic of the local field Q_p");
  lf->add_option("--chi", chi, "unram(c=E), tame(c=E,g=E) or char(c=E,a=K,g=[...])")->required();
  lf->add_option("--window", window, "Coefficient window lo..hi to print")->capture_default_str();

  auto* ni = app.add_subcommand("nointerp", "L-factors of congruent characters whose reductions differ");
  ni->add_option("--l", ell, "l, the coefficient characteristic")->capture_default_str();
  ni->add_option("--p", pn, "p, with l | p - 1")->capture_default_str();
  ni->add_option("--N", N, "Precision l^N of O_E")->capture_default_str();
  ni->add_option("--c", cval, "chi1(p) = chi2(p) as an element of O_E (default 1)");

  auto* cg = app.add_subcommand("congruence", "gamma(pi) against gamma(pi') modulo the maximal ideal");
  cg->add_option("--ring", c.ring, "Coefficient ring (local)");
  cg->add_option("--p", c.p, "Residue characteristic of the local field Q_p");
  cg->add_option("--rep", rep, "pi: spherical(...) or twist(spherical(...), CHI)")->required();
  cg->add_option("--rep2", rep2, "pi': congruent data over the same ring")->required();

  auto* sp = app.add_subcommand("specialize", "gamma over a fiber product against gamma at both points");
  sp->add_option("--family", family, "Family file with [point1], [point2] and [glue] blocks");
  sp->add_option("--p", c.p, "Residue characteristic of the local field Q_p");
  sp->add_option("--ring1", ring1, "Ring of the first point");
  sp->add_option("--rep1", rep1s, "Data of the first point");
  sp->add_option("--ring2", ring2, "Ring of the second point");
  sp->add_option("--rep2", rep2s, "Data of the second point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kContract;
  }

  // per-command defaults: the intro setting (l = 3, p = 7) for character
  // commands, p = 2 over unram(3,6,2) for the GL_n engine
  const bool intro = lf->parsed() || cg->parsed() || sp->parsed();
  if (c.ring.empty()) c.ring = intro ? "ram(3,6,t^2+t+1)" : "unram(3,6,2)";
  if (c.p == 0) c.p = intro ? 7 : 2;

  try {
    apply_precision(c);
    Report r("");
    if (zeta->parsed()) r = cmd_zeta(c, rep, j, window);
    if (gamma->parsed()) r = cmd_gamma(c, rep, battery, conductor, false, "gamma");
    if (fe->parsed()) r = cmd_gamma(c, rep, battery, conductor, true, "verify-fe");
    if (lf->parsed()) r = cmd_lfactor(c, chi, window);
    if (ni->parsed()) {
      c.p = pn;
      apply_precision(c);
      r = cmd_nointerp(ell, pn, N, cval);
    }
    if (cg->parsed()) r = cmd_congruence(c, rep, rep2);
    if (sp->parsed()) {
      std::vector<std::string> rings, reps;
      if (!ring1.empty() || !ring2.empty()) rings = {ring1, ring2};
      if (!rep1s.empty() || !rep2s.empty()) reps = {rep1s, rep2s};
      r = cmd_specialize(c, family, rings, reps);
    }
    return emit(r, c, out);
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kContract;
  } catch (const MissingRootsError& e) {
    err << "error: " << e.what() << '\n';
    return kContract;
  } catch (const PrecisionError& e) {
    err << "error: precision exhausted: " << e.what() << " (raise --precision)\n";
    return kContract;
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << '\n';
    return kFalse;
  }
}

}  // namespace ellgamma::cli
