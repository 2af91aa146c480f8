#include "slr/fowand.hpp"

#include "lexer.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace slr {

namespace {

FoFormula mk(FoKind k, VarId x, VarId y, FoFormula l, FoFormula r) {
  return std::make_shared<const FoNode>(FoNode{k, x, y, std::move(l), std::move(r)});
}

void check_var(VarId x) {
  if (x < 1 || x > kMaxVar) throw std::invalid_argument("variable index out of range");
}

}  // namespace

FoFormula fo_eq(VarId x, VarId y) {
  check_var(x);
  check_var(y);
  return mk(FoKind::Eq, x, y, nullptr, nullptr);
}
FoFormula fo_pointsto(VarId x, VarId y) {
  check_var(x);
  check_var(y);
  return mk(FoKind::PointsTo, x, y, nullptr, nullptr);
}
FoFormula fo_not(FoFormula f) { return mk(FoKind::Not, 0, 0, std::move(f), nullptr); }
FoFormula fo_and(FoFormula a, FoFormula b) { return mk(FoKind::And, 0, 0, std::move(a), std::move(b)); }
FoFormula fo_or(FoFormula a, FoFormula b) { return fo_not(fo_and(fo_not(std::move(a)), fo_not(std::move(b)))); }
FoFormula fo_implies(FoFormula a, FoFormula b) { return fo_not(fo_and(std::move(a), fo_not(std::move(b)))); }
FoFormula fo_wand(FoFormula a, FoFormula b) { return mk(FoKind::Wand, 0, 0, std::move(a), std::move(b)); }
FoFormula fo_forall(VarId x, FoFormula body) {
  check_var(x);
  return mk(FoKind::Forall, x, 0, std::move(body), nullptr);
}

std::set<VarId> fo_free_vars(const FoFormula& f) {
  switch (f->kind) {
    case FoKind::Eq:
    case FoKind::PointsTo: return {f->x, f->y};
    case FoKind::Not: return fo_free_vars(f->l);
    case FoKind::And:
    case FoKind::Wand: {
      auto a = fo_free_vars(f->l);
      auto b = fo_free_vars(f->r);
      a.insert(b.begin(), b.end());
      return a;
    }
    case FoKind::Forall: {
      auto a = fo_free_vars(f->l);
      a.erase(f->x);
      return a;
    }
  }
  return {};
}

VarId fo_max_var(const FoFormula& f) {
  VarId m = std::max(f->x, f->y);
  if (f->l) m = std::max(m, fo_max_var(f->l));
  if (f->r) m = std::max(m, fo_max_var(f->r));
  return m;
}

bool fo_has_wand(const FoFormula& f) {
  if (f->kind == FoKind::Wand) return true;
  return (f->l && fo_has_wand(f->l)) || (f->r && fo_has_wand(f->r));
}

std::size_t fo_size(const FoFormula& f) {
  return 1 + (f->l ? fo_size(f->l) : 0) + (f->r ? fo_size(f->r) : 0);
}

// ----------------------------------------------------------------- parsing

namespace {

using detail::Lexer;
using detail::Tok;

class FoParser {
 public:
  explicit FoParser(std::string_view s) : lex_(s) {}

  FoFormula parse_all() {
    FoFormula f = wand_expr();
    if (lex_.peek().kind != Tok::End)
      throw ParseError("unexpected token '" + lex_.peek().text + "'", lex_.peek().pos);
    return f;
  }

 private:
  bool is_sym(const char* s) const { return lex_.peek().kind == Tok::Sym && lex_.peek().text == s; }
  bool is_ident(const char* s) const { return lex_.peek().kind == Tok::Ident && lex_.peek().text == s; }

  void expect(const char* s) {
    if (!is_sym(s)) {
      const auto& t = lex_.peek();
      throw ParseError(std::string("expected '") + s + "'" +
                           (t.kind == Tok::End ? " before end of input" : ", found '" + t.text + "'"),
                       t.pos);
    }
    lex_.take();
  }

  VarId var() {
    if (lex_.peek().kind != Tok::Var) throw ParseError("expected a variable", lex_.peek().pos);
    return static_cast<VarId>(lex_.take().num);
  }

  FoFormula wand_expr() {
    FoFormula a = impl_expr();
    if (is_sym("-*")) {
      lex_.take();
      return fo_wand(a, wand_expr());
    }
    return a;
  }

  FoFormula impl_expr() {
    FoFormula a = or_expr();
    if (is_sym("=>")) {
      lex_.take();
      return fo_implies(a, impl_expr());
    }
    if (is_sym("<=>")) {
      lex_.take();
      FoFormula b = impl_expr();
      return fo_and(fo_implies(a, b), fo_implies(b, a));
    }
    return a;
  }

  FoFormula or_expr() {
    FoFormula a = and_expr();
    while (is_sym("\\/")) {
      lex_.take();
      a = fo_or(a, and_expr());
    }
    return a;
  }

  FoFormula and_expr() {
    FoFormula a = unary();
    while (is_sym("/\\")) {
      lex_.take();
      a = fo_and(a, unary());
    }
    return a;
  }

  FoFormula unary() {
    if (is_ident("not")) {
      lex_.take();
      return fo_not(unary());
    }
    if (is_ident("forall")) {
      lex_.take();
      VarId x = var();
      expect(".");
      return fo_forall(x, wand_expr());
    }
    return primary();
  }

  FoFormula primary() {
    if (is_sym("(")) {
      lex_.take();
      FoFormula f = wand_expr();
      expect(")");
      return f;
    }
    if (lex_.peek().kind == Tok::Var) {
      VarId x = var();
      if (is_sym("=")) {
        lex_.take();
        return fo_eq(x, var());
      }
      if (is_sym("!=")) {
        lex_.take();
        return fo_not(fo_eq(x, var()));
      }
      if (is_sym("~>")) {
        lex_.take();
        return fo_pointsto(x, var());
      }
      throw ParseError("expected '=', '!=' or '~>' after variable", lex_.peek().pos);
    }
    const auto& t = lex_.peek();
    if (t.kind == Tok::End) throw ParseError("unexpected end of input", t.pos);
    throw ParseError("unexpected token '" + t.text + "'", t.pos);
  }

  Lexer lex_;
};

// precedence: 0 top, 1 wand right, 2 wand left, 3 or, 4 and, 5 unary
void print_fo(const FoFormula& f, int prec, std::string& out) {
  auto var = [](VarId x) { return "x" + std::to_string(x); };
  switch (f->kind) {
    case FoKind::Eq: out += var(f->x) + " = " + var(f->y); return;
    case FoKind::PointsTo: out += var(f->x) + " ~> " + var(f->y); return;
    case FoKind::Not: {
      const FoFormula& c = f->l;
      if (c->kind == FoKind::Eq) {
        out += var(c->x) + " != " + var(c->y);
        return;
      }
      if (c->kind == FoKind::And && c->l->kind == FoKind::Not && c->r->kind == FoKind::Not) {
        bool paren = prec > 3;
        if (paren) out += '(';
        print_fo(c->l->l, 3, out);
        out += " \\/ ";
        print_fo(c->r->l, 4, out);
        if (paren) out += ')';
        return;
      }
      out += "not ";
      print_fo(c, 5, out);
      return;
    }
    case FoKind::And: {
      bool paren = prec > 4;
      if (paren) out += '(';
      print_fo(f->l, 4, out);
      out += " /\\ ";
      print_fo(f->r, 5, out);
      if (paren) out += ')';
      return;
    }
    case FoKind::Wand: {
      bool paren = prec > 1;
      if (paren) out += '(';
      print_fo(f->l, 2, out);
      out += " -* ";
      print_fo(f->r, 1, out);
      if (paren) out += ')';
      return;
    }
    case FoKind::Forall: {
      // the body runs to the end, so parenthesise anywhere but the top
      bool paren = prec > 0;
      if (paren) out += '(';
      out += "forall " + var(f->x) + " . ";
      print_fo(f->l, 0, out);
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace

FoFormula parse_fo(std::string_view text) { return FoParser(text).parse_all(); }

std::string print(const FoFormula& f) {
  std::string out;
  print_fo(f, 0, out);
  return out;
}

// ------------------------------------------------------------- translation

VarId bar(VarId x, int q) {
  if (x < 1 || x > 2 * q) throw std::invalid_argument("bar: variable outside x1..x2q");
  return x <= q ? x + q : x - q;
}

std::vector<VarId> translation_vars(int q) {
  std::vector<VarId> xs;
  for (VarId i = 1; i <= 2 * q; ++i) xs.push_back(i);
  return xs;
}

namespace {

void collect_bound(const FoFormula& f, std::vector<VarId>& out) {
  if (f->kind == FoKind::Forall) out.push_back(f->x);
  if (f->l) collect_bound(f->l, out);
  if (f->r) collect_bound(f->r, out);
}

struct Translator {
  int q;
  std::vector<std::pair<VarId, VarId>> involution;
  Formula safe_x;

  explicit Translator(int q_) : q(q_), safe_x(safe(translation_vars(q_))) {
    for (VarId x = 1; x <= 2 * q; ++x) involution.emplace_back(x, bar(x, q));
  }

  Formula go(const FoFormula& f) {
    switch (f->kind) {
      case FoKind::Eq: return next_eq(f->x, f->y);
      case FoKind::PointsTo: return next_pointsto(f->x, f->y, bar(f->x, q));
      case FoKind::Not: return lnot(go(f->l));
      case FoKind::And: return land(go(f->l), go(f->r));
      case FoKind::Forall: return wand(land(alloc(f->x), size_eq(1)), implies(safe_x, go(f->l)));
      case FoKind::Wand: {
        std::set<VarId> Z = fo_free_vars(f->l);
        std::vector<Formula> left, pre, cells;
        for (VarId z : Z) left.push_back(alloc(bar(z, q)));
        for (VarId z = 1; z <= 2 * q; ++z)
          if (!Z.count(z)) left.push_back(lnot(alloc(bar(z, q))));
        left.push_back(safe_x);
        left.push_back(rename(go(f->l), involution));
        for (VarId z : Z) pre.push_back(next_eq(z, bar(z, q)));
        pre.push_back(safe_x);
        for (VarId z : Z) cells.push_back(alloc(bar(z, q)));
        cells.push_back(size_eq(static_cast<long>(Z.size())));
        return wand(land_all(left), implies(land_all(pre), star(land_all(cells), go(f->r))));
      }
    }
    throw std::logic_error("translate: bad node");
  }
};

}  // namespace

Formula translate(const FoFormula& psi, const EncodingContext& ctx) {
  if (ctx.q < 1) throw std::invalid_argument("translate: q must be >= 1");
  if (2 * ctx.q > kMaxVar) throw std::invalid_argument("translate: q too large");
  if (fo_max_var(psi) > ctx.q)
    throw std::invalid_argument("translate: formula uses x" + std::to_string(fo_max_var(psi)) + " but q = " +
                                std::to_string(ctx.q));
  for (VarId z : ctx.Z)
    if (z < 1 || z > ctx.q) throw std::invalid_argument("translate: Z must be a subset of x1..xq");
  for (VarId v : fo_free_vars(psi))
    if (!ctx.Z.count(v)) throw std::invalid_argument("translate: free variable x" + std::to_string(v) + " not in Z");
  std::vector<VarId> bound;
  collect_bound(psi, bound);
  std::set<VarId> seen;
  for (VarId b : bound) {
    if (!seen.insert(b).second) throw CaptureError("translate: x" + std::to_string(b) + " is quantified twice");
    if (ctx.Z.count(b)) throw CaptureError("translate: quantified x" + std::to_string(b) + " is also free");
  }
  return Translator(ctx.q).go(psi);
}

namespace {

std::pair<Formula, Formula> initial_and_body(const FoFormula& psi, int q) {
  if (!fo_free_vars(psi).empty()) throw std::invalid_argument("t_sat/t_val: formula has free variables");
  if (q == 0) q = std::max<VarId>(1, fo_max_var(psi));
  std::vector<Formula> init;
  for (VarId i = 1; i <= 2 * q; ++i) init.push_back(lnot(alloc(i)));
  init.push_back(safe(translation_vars(q)));
  return {land_all(init), translate(psi, EncodingContext{q, {}})};
}

}  // namespace

Formula t_sat(const FoFormula& psi, int q) {
  auto [init, body] = initial_and_body(psi, q);
  return land(init, body);
}

Formula t_val(const FoFormula& psi, int q) {
  auto [init, body] = initial_and_body(psi, q);
  return implies(init, body);
}

// ---------------------------------------------------------------- encoding

MemoryState encode_state(const MemoryState& m1, const std::vector<Loc>& targets, const std::set<VarId>& Z) {
  if (targets.empty() || targets.size() % 2 != 0)
    throw std::invalid_argument("encode_state: need 2q targets");
  int q = static_cast<int>(targets.size() / 2);
  if (m1.q != q) throw std::invalid_argument("encode_state: source must define exactly q variables");
  std::set<Loc> rel = relevant_locations(m1);
  std::set<Loc> seen;
  for (Loc t : targets) {
    if (rel.count(t)) throw std::invalid_argument("encode_state: target " + std::to_string(t) + " is a source location");
    if (!seen.insert(t).second) throw std::invalid_argument("encode_state: targets must be pairwise distinct");
  }
  Heap h = m1.heap;
  for (VarId z : Z) {
    if (z < 1 || z > q) throw std::invalid_argument("encode_state: Z must be a subset of x1..xq");
    h[targets[static_cast<std::size_t>(z - 1)]] = m1.s(z);
  }
  return make_state(targets, std::move(h));
}

std::vector<Loc> canonical_targets(const MemoryState& m1, int q) {
  std::set<Loc> rel = relevant_locations(m1);
  Loc next = rel.empty() ? 0 : *rel.rbegin() + 1;
  std::vector<Loc> out;
  for (int i = 0; i < 2 * q; ++i) out.push_back(next++);
  return out;
}

// ---------------------------------------------------------------- checking

namespace {

struct FoChecker {
  unsigned fresh;
  WandPolicy policy;
  Checker checker;
  std::unordered_map<const FoNode*, Formula> qf;  // quantifier-free parts as formulae

  FoChecker(unsigned f, WandPolicy p) : fresh(f), policy(p), checker(p) {}

  // null when f has a quantifier
  const Formula* as_formula(const FoFormula& f) {
    auto it = qf.find(f.get());
    if (it != qf.end()) return it->second ? &it->second : nullptr;
    Formula out;
    switch (f->kind) {
      case FoKind::Eq: out = eq(f->x, f->y); break;
      case FoKind::PointsTo: out = pointsto(f->x, f->y); break;
      case FoKind::Not:
        if (auto a = as_formula(f->l)) out = lnot(*a);
        break;
      case FoKind::And:
      case FoKind::Wand: {
        auto a = as_formula(f->l);
        auto b = as_formula(f->r);
        if (a && b) out = f->kind == FoKind::And ? land(*a, *b) : wand(*a, *b);
        break;
      }
      case FoKind::Forall: break;
    }
    auto& slot = qf[f.get()];
    slot = out;
    return slot ? &slot : nullptr;
  }

  static std::set<Loc> universe(const MemoryState& m, unsigned extra) {
    std::set<Loc> u = relevant_locations(m);
    Loc next = u.empty() ? 0 : *u.rbegin() + 1;
    for (unsigned i = 0; i < extra; ++i) u.insert(next++);
    return u;
  }

  bool eval(const MemoryState& m, const FoFormula& f) {
    if (auto g = as_formula(f)) return checker.check(m, *g).value;
    switch (f->kind) {
      case FoKind::Not: return !eval(m, f->l);
      case FoKind::And: return eval(m, f->l) && eval(m, f->r);
      case FoKind::Forall: {
        MemoryState m2 = m;
        for (Loc l : universe(m, fresh)) {
          m2.store[static_cast<std::size_t>(f->x - 1)] = l;
          if (!eval(m2, f->l)) return false;
        }
        return true;
      }
      case FoKind::Wand: {
        if (policy.mode != WandPolicy::Mode::Bounded) throw WandForbidden();
        bool ok = true;
        MemoryState ext = m, sum = m;
        for_each_extension(m.heap, universe(m, policy.fresh_locations), policy.cell_bound, [&](const Heap& h) {
          if (!ok) return;
          ext.heap = h;
          if (!eval(ext, f->l)) return;
          sum.heap = m.heap;
          sum.heap.insert(h.begin(), h.end());
          if (!eval(sum, f->r)) ok = false;
        });
        return ok;
      }
      default: break;
    }
    throw std::logic_error("check_fo: bad node");
  }
};

}  // namespace

bool check_fo(const MemoryState& m, const FoFormula& psi, unsigned fresh, const WandPolicy& policy) {
  if (fo_max_var(psi) > m.q)
    throw std::invalid_argument("check_fo: formula uses x" + std::to_string(fo_max_var(psi)) +
                                " but the state only defines " + std::to_string(m.q) + " variable(s)");
  FoChecker c(fresh, policy);
  return c.eval(m, psi);
}

}  // namespace slr
