#include "slr/formula.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <unordered_map>

namespace slr {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::uint32_t kbit(Kind k) { return 1u << static_cast<unsigned>(k); }

Formula make(Kind k, VarId x, VarId y, Formula l, Formula r) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->x = x;
  n->y = y;
  std::size_t h = mix(static_cast<std::size_t>(k) + 1, static_cast<std::size_t>(x));
  h = mix(h, static_cast<std::size_t>(y));
  n->kinds = kbit(k);
  if (is_binary_atom(k)) {
    if (x < 1 || y < 1) throw std::invalid_argument("variable index must be >= 1");
    if (x > kMaxVar || y > kMaxVar)
      throw std::invalid_argument("variable index above " + std::to_string(kMaxVar));
    n->varmask = (1ULL << x) | (1ULL << y);
    n->maxvar = std::max(x, y);
  }
  if (l) {
    h = mix(h, l->hash);
    n->size += l->size;
    n->varmask |= l->varmask;
    n->kinds |= l->kinds;
    n->maxvar = std::max(n->maxvar, l->maxvar);
  }
  if (r) {
    h = mix(h, r->hash);
    n->size += r->size;
    n->varmask |= r->varmask;
    n->kinds |= r->kinds;
    n->maxvar = std::max(n->maxvar, r->maxvar);
  }
  switch (k) {
    case Kind::Not: n->msz = l->msz; break;
    case Kind::And:
    case Kind::Wand: n->msz = std::max(l->msz, r->msz); break;
    case Kind::Star: n->msz = l->msz + r->msz; break;
    default: n->msz = 1;
  }
  n->hash = h;
  n->l = std::move(l);
  n->r = std::move(r);
  return n;
}

}  // namespace

bool is_atom(Kind k) { return static_cast<unsigned>(k) <= static_cast<unsigned>(Kind::ReachPlus); }

bool is_binary_atom(Kind k) {
  return k == Kind::Eq || k == Kind::PointsTo || k == Kind::Ls || k == Kind::Reach ||
         k == Kind::ReachPlus;
}

Formula mk_true() {
  static const Formula f = make(Kind::True, 0, 0, nullptr, nullptr);
  return f;
}
Formula mk_false() {
  static const Formula f = make(Kind::False, 0, 0, nullptr, nullptr);
  return f;
}
Formula emp() {
  static const Formula f = make(Kind::Emp, 0, 0, nullptr, nullptr);
  return f;
}
Formula eq(VarId x, VarId y) { return make(Kind::Eq, x, y, nullptr, nullptr); }
Formula pointsto(VarId x, VarId y) { return make(Kind::PointsTo, x, y, nullptr, nullptr); }
Formula ls(VarId x, VarId y) { return make(Kind::Ls, x, y, nullptr, nullptr); }
Formula reach(VarId x, VarId y) { return make(Kind::Reach, x, y, nullptr, nullptr); }
Formula reachplus(VarId x, VarId y) { return make(Kind::ReachPlus, x, y, nullptr, nullptr); }
Formula lnot(Formula f) { return make(Kind::Not, 0, 0, std::move(f), nullptr); }
Formula land(Formula a, Formula b) { return make(Kind::And, 0, 0, std::move(a), std::move(b)); }
Formula star(Formula a, Formula b) { return make(Kind::Star, 0, 0, std::move(a), std::move(b)); }
Formula wand(Formula a, Formula b) { return make(Kind::Wand, 0, 0, std::move(a), std::move(b)); }

Formula atom(Kind k, VarId x, VarId y) {
  switch (k) {
    case Kind::True: return mk_true();
    case Kind::False: return mk_false();
    case Kind::Emp: return emp();
    default:
      if (!is_binary_atom(k)) throw std::invalid_argument("atom: not an atomic kind");
      return make(k, x, y, nullptr, nullptr);
  }
}

Formula lor(Formula a, Formula b) { return lnot(land(lnot(std::move(a)), lnot(std::move(b)))); }
Formula implies(Formula a, Formula b) { return lnot(land(std::move(a), lnot(std::move(b)))); }
Formula iff(Formula a, Formula b) { return land(implies(a, b), implies(b, a)); }
Formula neq(VarId x, VarId y) { return lnot(eq(x, y)); }

Formula land_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_true();
  Formula acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = land(acc, fs[i]);
  return acc;
}

Formula lor_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_false();
  Formula acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = lor(acc, fs[i]);
  return acc;
}

std::optional<std::pair<Formula, Formula>> match_or(const Formula& f) {
  if (f->kind != Kind::Not || f->l->kind != Kind::And) return std::nullopt;
  const auto& c = f->l;
  if (c->l->kind != Kind::Not || c->r->kind != Kind::Not) return std::nullopt;
  return std::make_pair(c->l->l, c->r->l);
}

bool same(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->kind != b->kind || a->x != b->x || a->y != b->y ||
      a->size != b->size)
    return false;
  if (a->l && !same(a->l, b->l)) return false;
  if (a->r && !same(a->r, b->r)) return false;
  return true;
}

std::uint64_t size(const Formula& f) { return f->size; }
unsigned msize(const Formula& f) { return f->msz; }
VarId max_var(const Formula& f) { return f->maxvar; }

std::set<VarId> vars(const Formula& f) {
  std::set<VarId> out;
  for (VarId i = 1; i <= kMaxVar; ++i)
    if (f->varmask & (1ULL << i)) out.insert(i);
  return out;
}

bool has_kind(const Formula& f, Kind k) { return (f->kinds & kbit(k)) != 0; }
bool has_wand(const Formula& f) { return has_kind(f, Kind::Wand); }
bool has_star(const Formula& f) { return has_kind(f, Kind::Star); }

// ---------------------------------------------------------------- printing

namespace {

std::string var_name(VarId v) { return "x" + std::to_string(v); }

struct Printer {
  std::string out;

  static int level(const Formula& f) {
    switch (f->kind) {
      case Kind::Wand: return 1;
      case Kind::And: return 4;
      case Kind::Star: return 5;
      case Kind::Not: return match_or(f) ? 3 : 6;
      default: return 7;
    }
  }

  void go(const Formula& f, int ctx) {
    int lv = level(f);
    bool paren = lv < ctx;
    if (paren) out += '(';
    switch (f->kind) {
      case Kind::True: out += "true"; break;
      case Kind::False: out += "false"; break;
      case Kind::Emp: out += "emp"; break;
      case Kind::Eq: out += var_name(f->x) + " = " + var_name(f->y); break;
      case Kind::PointsTo: out += var_name(f->x) + " ~> " + var_name(f->y); break;
      case Kind::Ls: out += "ls(" + var_name(f->x) + "," + var_name(f->y) + ")"; break;
      case Kind::Reach: out += "reach(" + var_name(f->x) + "," + var_name(f->y) + ")"; break;
      case Kind::ReachPlus:
        out += "reach+(" + var_name(f->x) + "," + var_name(f->y) + ")";
        break;
      case Kind::Not:
        if (auto o = match_or(f)) {
          go(o->first, 3);
          out += " \\/ ";
          go(o->second, 4);
        } else {
          out += "not ";
          go(f->l, 6);
        }
        break;
      case Kind::And:
        go(f->l, 4);
        out += " /\\ ";
        go(f->r, 5);
        break;
      case Kind::Star:
        go(f->l, 5);
        out += " * ";
        go(f->r, 6);
        break;
      case Kind::Wand:
        go(f->l, 2);
        out += " -* ";
        go(f->r, 1);
        break;
    }
    if (paren) out += ')';
  }
};

}  // namespace

std::string print(const Formula& f) {
  Printer p;
  p.go(f, 0);
  return p.out;
}

// ----------------------------------------------------------------- parsing

ParseError::ParseError(const std::string& msg, std::size_t p)
    : std::runtime_error(msg + " at position " + std::to_string(p)), pos(p) {}

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

class Parser {
 public:
  explicit Parser(std::string_view s) : lex_(s) {}

  Formula parse_all() {
    Formula f = wand_expr();
    if (lex_.peek().kind != Tok::End)
      throw ParseError("unexpected token '" + lex_.peek().text + "'", lex_.peek().pos);
    return f;
  }

 private:
  bool is_sym(const char* s) const {
    return lex_.peek().kind == Tok::Sym && lex_.peek().text == s;
  }
  bool is_ident(const char* s) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == s;
  }

  void expect(const char* s) {
    if (!is_sym(s)) {
      const auto& t = lex_.peek();
      throw ParseError(std::string("expected '") + s + "'" +
                           (t.kind == Tok::End ? " before end of input"
                                               : ", found '" + t.text + "'"),
                       t.pos);
    }
    lex_.take();
  }

  VarId var() {
    if (lex_.peek().kind != Tok::Var)
      throw ParseError("expected a variable", lex_.peek().pos);
    return static_cast<VarId>(lex_.take().num);
  }

  long number() {
    if (lex_.peek().kind != Tok::Num) throw ParseError("expected a number", lex_.peek().pos);
    return lex_.take().num;
  }

  Formula wand_expr() {
    Formula a = impl_expr();
    if (is_sym("-*")) {
      lex_.take();
      return wand(a, wand_expr());
    }
    if (is_sym("-o")) {
      lex_.take();
      return septraction(a, wand_expr());
    }
    return a;
  }

  Formula impl_expr() {
    Formula a = or_expr();
    if (is_sym("=>")) {
      lex_.take();
      return implies(a, impl_expr());
    }
    if (is_sym("<=>")) {
      lex_.take();
      return iff(a, impl_expr());
    }
    return a;
  }

  Formula or_expr() {
    Formula a = and_expr();
    while (is_sym("\\/")) {
      lex_.take();
      a = lor(a, and_expr());
    }
    return a;
  }

  Formula and_expr() {
    Formula a = star_expr();
    while (is_sym("/\\")) {
      lex_.take();
      a = land(a, star_expr());
    }
    return a;
  }

  Formula star_expr() {
    Formula a = unary();
    while (is_sym("*")) {
      lex_.take();
      a = star(a, unary());
    }
    return a;
  }

  Formula unary() {
    if (is_ident("not")) {
      lex_.take();
      return lnot(unary());
    }
    return primary();
  }

  std::vector<VarId> var_list() {
    std::vector<VarId> xs;
    expect("(");
    xs.push_back(var());
    while (is_sym(",")) {
      lex_.take();
      xs.push_back(var());
    }
    expect(")");
    return xs;
  }

  // "(a; b)" or "(a, b; c)".
  std::pair<std::vector<VarId>, VarId> vars_semi() {
    std::vector<VarId> xs;
    expect("(");
    xs.push_back(var());
    while (is_sym(",")) {
      lex_.take();
      xs.push_back(var());
    }
    expect(";");
    VarId aux = var();
    expect(")");
    return {xs, aux};
  }

  Formula primary() {
    const Token t = lex_.peek();
    if (is_sym("(")) {
      lex_.take();
      Formula f = wand_expr();
      expect(")");
      return f;
    }
    if (is_sym("[")) {
      lex_.take();
      Formula f = wand_expr();
      expect("]");
      expect("_");
      return bracket(f, number());
    }
    if (t.kind == Tok::Var) {
      VarId x = var();
      if (is_sym("=")) {
        lex_.take();
        return eq(x, var());
      }
      if (is_sym("!=")) {
        lex_.take();
        return neq(x, var());
      }
      if (is_sym("~>")) {
        lex_.take();
        return pointsto(x, var());
      }
      if (is_sym("|->")) {
        lex_.take();
        return mapsto(x, var());
      }
      throw ParseError("expected '=', '!=', '~>' or '|->' after variable", lex_.peek().pos);
    }
    if (t.kind != Tok::Ident) {
      throw ParseError(t.kind == Tok::End ? "unexpected end of input"
                                          : "unexpected token '" + t.text + "'",
                       t.pos);
    }
    const std::string& w = t.text;
    if (w == "emp") return lex_.take(), emp();
    if (w == "true") return lex_.take(), mk_true();
    if (w == "false") return lex_.take(), mk_false();
    if (w == "ls" || w == "reach" || w == "reach+") {
      lex_.take();
      auto xs = var_list();
      if (xs.size() != 2) throw ParseError(w + " takes two variables", t.pos);
      if (w == "ls") return ls(xs[0], xs[1]);
      if (w == "reach+") return reachplus(xs[0], xs[1]);
      if (is_sym("=")) {
        lex_.take();
        return reach_eq(xs[0], xs[1], number());
      }
      if (is_sym("<=")) {
        lex_.take();
        return reach_leq(xs[0], xs[1], number());
      }
      return reach(xs[0], xs[1]);
    }
    if (w == "size") {
      lex_.take();
      if (is_sym(">=")) return lex_.take(), size_geq(number());
      if (is_sym("<=")) return lex_.take(), size_leq(number());
      if (is_sym("=")) return lex_.take(), size_eq(number());
      throw ParseError("expected '>=', '<=' or '=' after size", lex_.peek().pos);
    }
    if (w == "alloc") {
      lex_.take();
      auto xs = var_list();
      if (xs.size() != 1) throw ParseError("alloc takes one variable", t.pos);
      return alloc(xs[0]);
    }
    if (w == "allocinv" || w == "loop2") {
      lex_.take();
      auto [xs, aux] = vars_semi();
      if (xs.size() != 1) throw ParseError(w + " takes (x; y)", t.pos);
      return w == "allocinv" ? alloc_inv(xs[0], aux) : loop2(xs[0], aux);
    }
    if (w == "nexteq") {
      lex_.take();
      auto xs = var_list();
      if (xs.size() != 2) throw ParseError("nexteq takes two variables", t.pos);
      return next_eq(xs[0], xs[1]);
    }
    if (w == "nextpt") {
      lex_.take();
      auto [xs, aux] = vars_semi();
      if (xs.size() != 2) throw ParseError("nextpt takes (x, y; z)", t.pos);
      return next_pointsto(xs[0], xs[1], aux);
    }
    if (w == "safe") {
      lex_.take();
      auto xs = var_list();
      if (xs.size() % 2 != 0) throw ParseError("safe takes an even number of variables", t.pos);
      return safe(xs);
    }
    throw ParseError("unknown identifier '" + w + "'", t.pos);
  }

  Lexer lex_;
};

}  // namespace

Formula parse(std::string_view text) {
  Parser p(text);
  try {
    return p.parse_all();
  } catch (const MacroError& e) {
    throw ParseError(e.what(), 0);
  }
}

// ------------------------------------------------------------------ macros

Formula size_geq(long beta) {
  if (beta < 0) throw MacroError("size_geq: negative bound");
  Formula f = mk_true();
  for (long i = 0; i < beta; ++i) f = star(f, lnot(emp()));
  return f;
}

Formula size_leq(long beta) {
  if (beta < 0) throw MacroError("size_leq: negative bound");
  return lnot(size_geq(beta + 1));
}

Formula size_eq(long beta) {
  if (beta < 0) throw MacroError("size_eq: negative bound");
  return land(size_leq(beta), size_geq(beta));
}

Formula septraction(Formula a, Formula b) { return lnot(wand(std::move(a), lnot(std::move(b)))); }

Formula alloc(VarId x) { return wand(pointsto(x, x), mk_false()); }

Formula mapsto(VarId x, VarId y) { return land(pointsto(x, y), size_eq(1)); }

Formula bracket(Formula f, long gamma) {
  if (gamma < 0) throw MacroError("bracket_gamma: negative size");
  return star(land(size_eq(gamma), std::move(f)), mk_true());
}

Formula reach_eq(VarId x, VarId y, long gamma) { return bracket(ls(x, y), gamma); }

Formula reach_leq(VarId x, VarId y, long gamma) {
  if (gamma < 0) throw MacroError("reach_leq_gamma: negative size");
  std::vector<Formula> ds;
  for (long g = 0; g <= gamma; ++g) ds.push_back(reach_eq(x, y, g));
  return lor_all(ds);
}

Formula alloc_inv(VarId x, VarId y) {
  Formula left = land(land(alloc(y), lnot(pointsto(y, x))), size_eq(1));
  return lor(lor(pointsto(x, x), pointsto(y, x)),
             bracket(septraction(left, reach_eq(y, x, 2)), 1));
}

namespace {

Formula loop2_with(VarId x, VarId y, bool both_ways) {
  Formula link = both_ways ? iff(pointsto(x, y), pointsto(y, x)) : implies(pointsto(x, y), pointsto(y, x));
  Formula head = land(lnot(pointsto(x, x)), link);
  Formula inner = land(land(alloc(x), alloc_inv(x, y)), wand(mk_true(), lnot(reach_eq(x, y, 2))));
  return land(head, bracket(inner, 2));
}

}  // namespace

// With the head x ~> y <=> y ~> x the macro rejects y ~> x -> w -> x
// with w != y although x loops in two steps there.  Only the => half is needed.
Formula loop2(VarId x, VarId y) { return loop2_with(x, y, false); }
Formula loop2_literal(VarId x, VarId y) { return loop2_with(x, y, true); }

namespace {

// /\ of not(u ~> v) over u, v in {x, y}.
Formula no_pointers(VarId x, VarId y) {
  std::vector<VarId> us{x};
  if (y != x) us.push_back(y);
  std::vector<Formula> cs;
  for (VarId u : us)
    for (VarId v : us) cs.push_back(lnot(pointsto(u, v)));
  return land_all(cs);
}

}  // namespace

Formula next_eq(VarId x, VarId y) {
  Formula d = lor(lor(land(pointsto(x, y), pointsto(y, y)), land(pointsto(y, x), pointsto(x, x))),
                  land(no_pointers(x, y),
                       wand(mk_true(), lnot(land(reach_eq(x, y, 2), reach_eq(y, x, 2))))));
  Formula two = bracket(land(land(alloc(x), alloc(y)), d), 2);
  return land(implies(neq(x, y), two), alloc(x));
}

Formula next_pointsto(VarId x, VarId y, VarId z) {
  Formula phi_eq =
      lor(lor(lor(land(pointsto(x, x), pointsto(y, x)), land(pointsto(y, y), pointsto(x, y))),
              land(pointsto(x, z), pointsto(z, z))),
          bracket(land(land(alloc(x), lnot(alloc_inv(x, z))),
                       wand(mk_true(), lnot(reach_leq(x, z, 3)))),
                  2));
  Formula f3 = land(land(land(land(alloc(x), alloc(y)), no_pointers(x, y)), lnot(reach_leq(x, y, 3))),
                    septraction(land(size_eq(1), alloc_inv(y, x)),
                                land(reach_eq(x, y, 3), loop2(y, x))));
  Formula phi_neq = lor(lor(lor(land(pointsto(x, y), alloc(y)), land(pointsto(y, y), reach_eq(x, y, 2))),
                            land(pointsto(y, x), loop2(x, y))),
                        bracket(f3, 3));
  Formula n = next_eq(x, y);
  return lor(land(n, phi_eq), land(lnot(n), phi_neq));
}

Formula safe(const std::vector<VarId>& xs) {
  if (xs.size() % 2 != 0) throw MacroError("safe: expects an even number of variables");
  std::size_t q = xs.size() / 2;
  std::vector<Formula> cs;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) cs.push_back(neq(xs[i], xs[j]));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    VarId bar = xs[i < q ? i + q : i - q];
    cs.push_back(lnot(alloc_inv(xs[i], bar)));
  }
  return land_all(cs);
}

namespace {

const Var& want_var(const std::vector<MacroArg>& args, std::size_t i, std::string_view name) {
  if (auto p = std::get_if<Var>(&args[i])) {
    if (p->i < 1) throw MacroError(std::string(name) + ": variable index must be >= 1");
    return *p;
  }
  throw MacroError(std::string(name) + ": argument " + std::to_string(i + 1) +
                   " must be a variable");
}

long want_nat(const std::vector<MacroArg>& args, std::size_t i, std::string_view name) {
  if (auto p = std::get_if<long>(&args[i])) {
    if (*p < 0) throw MacroError(std::string(name) + ": negative argument");
    return *p;
  }
  throw MacroError(std::string(name) + ": argument " + std::to_string(i + 1) +
                   " must be a natural");
}

const Formula& want_formula(const std::vector<MacroArg>& args, std::size_t i,
                            std::string_view name) {
  if (auto p = std::get_if<Formula>(&args[i])) return *p;
  throw MacroError(std::string(name) + ": argument " + std::to_string(i + 1) +
                   " must be a formula");
}

void arity(const std::vector<MacroArg>& args, std::size_t n, std::string_view name) {
  if (args.size() != n)
    throw MacroError(std::string(name) + ": expected " + std::to_string(n) + " argument(s), got " +
                     std::to_string(args.size()));
}

}  // namespace

Formula expand_macro(std::string_view name, const std::vector<MacroArg>& a) {
  if (name == "size_geq" || name == "size_leq" || name == "size_eq") {
    arity(a, 1, name);
    long b = want_nat(a, 0, name);
    return name == "size_geq" ? size_geq(b) : name == "size_leq" ? size_leq(b) : size_eq(b);
  }
  if (name == "septraction") {
    arity(a, 2, name);
    return septraction(want_formula(a, 0, name), want_formula(a, 1, name));
  }
  if (name == "alloc") {
    arity(a, 1, name);
    return alloc(want_var(a, 0, name).i);
  }
  if (name == "mapsto") {
    arity(a, 2, name);
    return mapsto(want_var(a, 0, name).i, want_var(a, 1, name).i);
  }
  if (name == "bracket_gamma") {
    arity(a, 2, name);
    return bracket(want_formula(a, 0, name), want_nat(a, 1, name));
  }
  if (name == "reach_eq_gamma" || name == "reach_leq_gamma") {
    arity(a, 3, name);
    VarId x = want_var(a, 0, name).i, y = want_var(a, 1, name).i;
    long g = want_nat(a, 2, name);
    return name == "reach_eq_gamma" ? reach_eq(x, y, g) : reach_leq(x, y, g);
  }
  if (name == "alloc_inv" || name == "loop2" || name == "next_eq") {
    arity(a, 2, name);
    VarId x = want_var(a, 0, name).i, y = want_var(a, 1, name).i;
    return name == "alloc_inv" ? alloc_inv(x, y) : name == "loop2" ? loop2(x, y) : next_eq(x, y);
  }
  if (name == "next_pointsto") {
    arity(a, 3, name);
    return next_pointsto(want_var(a, 0, name).i, want_var(a, 1, name).i, want_var(a, 2, name).i);
  }
  if (name == "safe") {
    std::vector<VarId> xs;
    for (std::size_t i = 0; i < a.size(); ++i) xs.push_back(want_var(a, i, name).i);
    return safe(xs);
  }
  throw MacroError("unknown macro '" + std::string(name) + "'");
}

std::optional<std::pair<VarId, VarId>> match_mapsto(const Formula& f) {
  static const Formula one = size_eq(1);
  if (f->kind != Kind::And || f->l->kind != Kind::PointsTo) return std::nullopt;
  if (!same(f->r, one)) return std::nullopt;
  return std::make_pair(f->l->x, f->l->y);
}

std::optional<VarId> match_alloc(const Formula& f) {
  if (f->kind != Kind::Wand || f->r->kind != Kind::False) return std::nullopt;
  if (f->l->kind != Kind::PointsTo || f->l->x != f->l->y) return std::nullopt;
  return f->l->x;
}

// -------------------------------------------------------------- rewriting

namespace {

using Memo = std::unordered_map<const FormulaNode*, Formula>;

Formula rebuild(const Formula& f, Memo& memo, const std::function<Formula(const Formula&)>& leaf) {
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;
  Formula out;
  switch (f->kind) {
    case Kind::Not: out = lnot(rebuild(f->l, memo, leaf)); break;
    case Kind::And: out = land(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf)); break;
    case Kind::Star: out = star(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf)); break;
    case Kind::Wand: out = wand(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf)); break;
    default: out = leaf(f);
  }
  memo.emplace(f.get(), out);
  return out;
}

}  // namespace

Formula rewrite_reach(const Formula& f, ReachTarget target) {
  Memo memo;
  auto leaf = [target](const Formula& a) -> Formula {
    VarId x = a->x, y = a->y;
    switch (target) {
      case ReachTarget::ReachPlus:
        if (a->kind == Kind::Reach) return lor(eq(x, y), reachplus(x, y));
        // the x != y guard is needed: {x -> x} is a minimal reach+(x,x) heap
        if (a->kind == Kind::Ls)
          return lor(land(eq(x, y), emp()),
                     land(land(neq(x, y), reachplus(x, y)), lnot(star(lnot(emp()), reachplus(x, y)))));
        return a;
      case ReachTarget::Reach:
        if (a->kind == Kind::Ls) return land(reach(x, y), lnot(star(lnot(emp()), reach(x, y))));
        // A cycle through a single location is not expressible with reach alone.
        if (a->kind == Kind::ReachPlus)
          return lor(land(neq(x, y), reach(x, y)), land(eq(x, y), reachplus(x, y)));
        return a;
      case ReachTarget::Ls:
        if (a->kind == Kind::Reach) return star(mk_true(), ls(x, y));
        if (a->kind == Kind::ReachPlus)
          return lor(land(neq(x, y), star(mk_true(), ls(x, y))), land(eq(x, y), reachplus(x, y)));
        return a;
    }
    return a;
  };
  return rebuild(f, memo, leaf);
}

Formula rename(const Formula& f, const std::vector<std::pair<VarId, VarId>>& map) {
  auto sub = [&map](VarId v) {
    for (auto [from, to] : map)
      if (from == v) return to;
    return v;
  };
  Memo memo;
  auto leaf = [&sub](const Formula& a) -> Formula {
    if (!is_binary_atom(a->kind)) return a;
    return atom(a->kind, sub(a->x), sub(a->y));
  };
  return rebuild(f, memo, leaf);
}

// ---------------------------------------------------------- classification

namespace {

constexpr std::uint32_t bits(std::initializer_list<Kind> ks) {
  std::uint32_t m = 0;
  for (Kind k : ks) m |= 1u << static_cast<unsigned>(k);
  return m;
}

constexpr std::uint32_t kBase =
    bits({Kind::True, Kind::False, Kind::Emp, Kind::Eq, Kind::PointsTo, Kind::Not, Kind::And,
          Kind::Star});
constexpr std::uint32_t kStar = kBase;
constexpr std::uint32_t kStarWand = kBase | bits({Kind::Wand});
constexpr std::uint32_t kStarReach = kBase | bits({Kind::Ls, Kind::Reach, Kind::ReachPlus});
constexpr std::uint32_t kStarWandLs = kBase | bits({Kind::Wand, Kind::Ls, Kind::Reach});

bool within(const Formula& f, std::uint32_t allowed) { return (f->kinds & ~allowed) == 0; }

bool is_spatial(const Formula& f) {
  switch (f->kind) {
    case Kind::Emp:
    case Kind::True:
    case Kind::Ls: return true;
    case Kind::Star: return is_spatial(f->l) && is_spatial(f->r);
    default: return match_mapsto(f).has_value();
  }
}

bool is_bool_shf(const Formula& f) {
  if (is_spatial(f)) return true;
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Eq: return true;
    case Kind::Not: return is_bool_shf(f->l);
    case Kind::And: return is_bool_shf(f->l) && is_bool_shf(f->r);
    default: return false;
  }
}

bool is_boolcomb(const Formula& f) {
  if (within(f, kStarWand) || within(f, kStarReach)) return true;
  if (f->kind == Kind::Not) return is_boolcomb(f->l);
  if (f->kind == Kind::And) return is_boolcomb(f->l) && is_boolcomb(f->r);
  return false;
}

}  // namespace

bool in_fragment(const Formula& f, Fragment fr) {
  switch (fr) {
    case Fragment::SL_STAR: return within(f, kStar);
    case Fragment::SL_STAR_WAND: return within(f, kStarWand);
    case Fragment::SL_STAR_REACHPLUS: return within(f, kStarReach);
    case Fragment::SL_STAR_WAND_LS: return within(f, kStarWandLs);
    case Fragment::BOOL_SHF: return is_bool_shf(f);
    case Fragment::BOOLCOMB: return is_boolcomb(f);
    case Fragment::NONE: return false;
  }
  return false;
}

std::set<Fragment> classify(const Formula& f) {
  std::set<Fragment> out;
  for (Fragment fr : {Fragment::SL_STAR, Fragment::SL_STAR_WAND, Fragment::SL_STAR_REACHPLUS,
                      Fragment::SL_STAR_WAND_LS, Fragment::BOOL_SHF})
    if (in_fragment(f, fr)) out.insert(fr);
  // Reported only when the formula genuinely mixes the two decidable fragments.
  if (is_boolcomb(f) && !within(f, kStarWand) && !within(f, kStarReach))
    out.insert(Fragment::BOOLCOMB);
  if (out.empty()) out.insert(Fragment::NONE);
  return out;
}

std::string to_string(Fragment fr) {
  switch (fr) {
    case Fragment::SL_STAR: return "SL_STAR";
    case Fragment::SL_STAR_WAND: return "SL_STAR_WAND";
    case Fragment::SL_STAR_REACHPLUS: return "SL_STAR_REACHPLUS";
    case Fragment::SL_STAR_WAND_LS: return "SL_STAR_WAND_LS";
    case Fragment::BOOL_SHF: return "BOOL_SHF";
    case Fragment::BOOLCOMB: return "BOOLCOMB";
    case Fragment::NONE: return "NONE";
  }
  return "NONE";
}

}  // namespace slr
