#include "slr/testform.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace slr {

std::string to_string(const TestAtom& a) {
  switch (a.kind) {
    case TestAtom::Kind::Eq: return to_string(a.t) + " = " + to_string(a.u);
    case TestAtom::Kind::Alloc: return "alloc(" + to_string(a.t) + ")";
    case TestAtom::Kind::PointsTo: return to_string(a.t) + " ~> " + to_string(a.u);
    case TestAtom::Kind::Sees:
      return "sees(" + to_string(a.t) + "," + to_string(a.u) + ") >= " + std::to_string(a.beta + 1);
    case TestAtom::Kind::SizeOthers: return "sizeothers >= " + std::to_string(a.beta);
  }
  return "?";
}

std::vector<TestAtom> test_atoms(int q, unsigned alpha) {
  std::vector<Term> ts = all_terms(q);
  std::vector<TestAtom> out;
  for (const Term& t : ts)
    for (const Term& u : ts) out.push_back(TestAtom::eq(t, u));
  for (const Term& t : ts) out.push_back(TestAtom::alloc(t));
  for (const Term& t : ts)
    for (const Term& u : ts) out.push_back(TestAtom::pointsto(t, u));
  for (const Term& t : ts)
    for (const Term& u : ts)
      for (unsigned b = 1; b <= alpha; ++b) out.push_back(TestAtom::sees(t, u, b));
  for (unsigned b = 1; b <= alpha; ++b) out.push_back(TestAtom::sizeothers(b));
  return out;
}

namespace {

std::optional<Loc> val(const SupportGraph& g, const Term& t) {
  return g.value.at(term_index(t, g.q));
}

// |btw| of the edge from t to u, if there is one
std::optional<std::size_t> edge_btw(const SupportGraph& g, const Term& t, const Term& u) {
  auto a = val(g, t), b = val(g, u);
  if (!a || !b) return std::nullopt;
  auto it = g.E.find(*a);
  if (it == g.E.end() || it->second != *b) return std::nullopt;
  return g.btw.at({*a, *b}).size();
}

}  // namespace

bool eval_atom(const SupportGraph& g, const TestAtom& a) {
  switch (a.kind) {
    case TestAtom::Kind::Eq: {
      auto x = val(g, a.t), y = val(g, a.u);
      return x && y && *x == *y;
    }
    case TestAtom::Kind::Alloc: {
      auto x = val(g, a.t);
      return x && g.rho.count(*x);
    }
    case TestAtom::Kind::PointsTo: {
      auto n = edge_btw(g, a.t, a.u);
      return n && *n == 0;
    }
    case TestAtom::Kind::Sees: {
      auto n = edge_btw(g, a.t, a.u);
      return n && *n >= a.beta;
    }
    case TestAtom::Kind::SizeOthers: return g.rem.size() >= a.beta;
  }
  return false;
}

bool eval_atom(const MemoryState& m, const TestAtom& a) { return eval_atom(build(m), a); }

LiteralProfile profile(const SupportGraph& g, unsigned alpha) {
  if (alpha < 1) throw std::invalid_argument("profile: alpha must be >= 1");
  LiteralProfile p{g.q, alpha, {}};
  for (const TestAtom& a : test_atoms(g.q, alpha)) p.bits.push_back(eval_atom(g, a));
  return p;
}

LiteralProfile profile(const MemoryState& m, unsigned alpha) { return profile(build(m), alpha); }

std::string dump(const LiteralProfile& p) {
  std::vector<TestAtom> atoms = test_atoms(p.q, p.alpha);
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (p.bits[i]) lines.push_back(to_string(atoms[i]));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (auto& l : lines) out += l + "\n";
  return out;
}

std::optional<std::map<Loc, Loc>> graph_map(const SupportGraph& g1, const SupportGraph& g2,
                                            unsigned alpha) {
  if (g1.q != g2.q || g1.V.size() != g2.V.size()) return std::nullopt;
  std::map<Loc, Loc> f;
  // A3 pins f on every vertex: follow the first label
  for (Loc l : g1.V) {
    const auto& lab = g1.labels.at(l);
    auto img = val(g2, lab.front());
    if (!img || g2.labels.at(*img) != lab) return std::nullopt;
    f[l] = *img;
  }
  auto cap = [alpha](std::size_t n) { return std::min<std::size_t>(alpha, n); };
  for (Loc l : g1.V) {
    Loc fl = f.at(l);
    if (g1.rho.count(l) != g2.rho.count(fl)) return std::nullopt;  // A2
    auto e1 = g1.E.find(l);
    auto e2 = g2.E.find(fl);
    if ((e1 == g1.E.end()) != (e2 == g2.E.end())) return std::nullopt;  // A1
    if (e1 == g1.E.end()) continue;
    if (f.at(e1->second) != e2->second) return std::nullopt;
    if (cap(g1.btw.at(*e1).size()) != cap(g2.btw.at(*e2).size())) return std::nullopt;  // A4
  }
  if (cap(g1.rem.size()) != cap(g2.rem.size())) return std::nullopt;  // A5
  return f;
}

bool equivalent_by_profile(const MemoryState& m1, const MemoryState& m2, unsigned alpha) {
  return profile(m1, alpha) == profile(m2, alpha);
}

bool equivalent(const MemoryState& m1, const MemoryState& m2, unsigned alpha) {
  if (m1.q != m2.q) throw std::invalid_argument("equivalent: states differ in q");
  SupportGraph g1 = build(m1), g2 = build(m2);
  bool by_profile = profile(g1, alpha) == profile(g2, alpha);
  bool by_map = graph_map(g1, g2, alpha).has_value();
  if (by_profile != by_map)
    throw EquivalenceMismatch("profile and support-graph map disagree on " + show(m1) + " vs " +
                              show(m2));
  return by_profile;
}

bool eval(const SupportGraph& g, const TestExpr& e) {
  switch (e.op) {
    case TestExpr::Op::True: return true;
    case TestExpr::Op::False: return false;
    case TestExpr::Op::Atom: return eval_atom(g, e.atom);
    case TestExpr::Op::Not: return !eval(g, e.kids[0]);
    case TestExpr::Op::And:
      return std::all_of(e.kids.begin(), e.kids.end(), [&](const TestExpr& k) { return eval(g, k); });
    case TestExpr::Op::Or:
      return std::any_of(e.kids.begin(), e.kids.end(), [&](const TestExpr& k) { return eval(g, k); });
  }
  return false;
}

std::size_t expr_size(const TestExpr& e) {
  std::size_t n = 1;
  for (const auto& k : e.kids) n += expr_size(k);
  return n;
}

std::string to_string(const TestExpr& e) {
  auto join = [&](const char* op) {
    std::string s = "(";
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      if (i) s += op;
      s += to_string(e.kids[i]);
    }
    return s + ")";
  };
  switch (e.op) {
    case TestExpr::Op::True: return "true";
    case TestExpr::Op::False: return "false";
    case TestExpr::Op::Atom: return to_string(e.atom);
    case TestExpr::Op::Not: return "not " + to_string(e.kids[0]);
    case TestExpr::Op::And: return e.kids.empty() ? "true" : join(" /\\ ");
    case TestExpr::Op::Or: return e.kids.empty() ? "false" : join(" \\/ ");
  }
  return "?";
}

namespace {

// sees(t,u) >= 1, spelled out since Test(q,alpha) has no such atom
TestExpr sees_one(const Term& t, const Term& u) {
  return TestExpr::any({TestExpr::of(TestAtom::pointsto(t, u)), TestExpr::of(TestAtom::sees(t, u, 1))});
}

TestExpr encode_emp(int q) {
  std::vector<TestExpr> cs{TestExpr::lnot(TestExpr::of(TestAtom::sizeothers(1)))};
  for (VarId i = 1; i <= q; ++i) cs.push_back(TestExpr::lnot(TestExpr::of(TestAtom::alloc(Term::var(i)))));
  return TestExpr::all(std::move(cs));
}

TestExpr encode_reachplus(int q, VarId i, VarId j) {
  std::vector<Term> ts = all_terms(q);
  std::vector<TestExpr> ds;
  std::vector<Term> chain{Term::var(i)};
  // chain holds t1..t_{n-1}, pairwise distinct; close each one with t_n = x_j
  std::function<void()> grow = [&]() {
    std::vector<TestExpr> cs;
    for (std::size_t d = 0; d + 1 < chain.size(); ++d) cs.push_back(sees_one(chain[d], chain[d + 1]));
    cs.push_back(sees_one(chain.back(), Term::var(j)));
    ds.push_back(TestExpr::all(std::move(cs)));
    for (const Term& t : ts) {
      if (std::find(chain.begin(), chain.end(), t) != chain.end()) continue;
      chain.push_back(t);
      grow();
      chain.pop_back();
    }
  };
  grow();
  return TestExpr::any(std::move(ds));
}

TestExpr size_v(const std::vector<Term>& ts, const Term& v, unsigned b) {
  if (b == 0) return TestExpr::truth(true);
  if (b == 1) return TestExpr::of(TestAtom::alloc(v));
  std::vector<TestExpr> ds;
  for (const Term& u : ts) ds.push_back(TestExpr::of(TestAtom::sees(v, u, b - 1)));
  return TestExpr::any(std::move(ds));
}

TestExpr encode_size(int q, unsigned alpha, unsigned beta, bool prune) {
  std::vector<Term> ts = all_terms(q);
  std::size_t n = ts.size();
  std::vector<TestExpr> ds;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::vector<Term> V;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1ULL << k)) V.push_back(ts[k]);
    std::vector<TestExpr> distinct;
    for (const Term& v : V)
      for (const Term& w : V)
        if (v != w) distinct.push_back(TestExpr::lnot(TestExpr::of(TestAtom::eq(v, w))));
    std::vector<unsigned> bv(V.size(), 0);
    unsigned lo = prune ? 1 : 0;
    std::function<void(std::size_t, unsigned)> pick = [&](std::size_t k, unsigned sum) {
      if (k == V.size()) {
        for (unsigned br = 0; br <= alpha; ++br) {
          if (sum + br < beta) continue;
          if (prune && sum + br != beta) continue;
          std::vector<TestExpr> cs;
          cs.push_back(br == 0 ? TestExpr::truth(true) : TestExpr::of(TestAtom::sizeothers(br)));
          for (std::size_t v = 0; v < V.size(); ++v) cs.push_back(size_v(ts, V[v], bv[v]));
          cs.insert(cs.end(), distinct.begin(), distinct.end());
          ds.push_back(TestExpr::all(std::move(cs)));
        }
        return;
      }
      for (unsigned b = lo; b <= alpha + 1; ++b) {
        if (prune && sum + b > beta) break;
        bv[k] = b;
        pick(k + 1, sum + b);
      }
    };
    pick(0, 0);
  }
  return TestExpr::any(std::move(ds));
}

}  // namespace

TestExpr encode_atomic(const Formula& a, int q, unsigned alpha, EncodeOptions opt) {
  if (q < 1 || alpha < 1) throw EncodeError("encode_atomic: q and alpha must be >= 1");
  if (max_var(a) > q) throw EncodeError("encode_atomic: variable beyond q");
  if (a->kind == Kind::Emp) return encode_emp(q);
  if (a->kind == Kind::ReachPlus) return encode_reachplus(q, a->x, a->y);
  // size >= beta is true * not emp * ... with 3 beta + 1 nodes
  if (size(a) % 3 == 1) {
    long beta = static_cast<long>((size(a) - 1) / 3);
    if (same(a, size_geq(beta))) {
      if (static_cast<unsigned long>(beta) > alpha)
        throw EncodeError("encode_atomic: size>=" + std::to_string(beta) + " exceeds alpha");
      if (beta == 0) return TestExpr::truth(true);
      return encode_size(q, alpha, static_cast<unsigned>(beta), opt.prune);
    }
  }
  throw EncodeError("encode_atomic: expected emp, reach+ or size>=beta, got " + print(a));
}

std::pair<Heap, Heap> match_split(const MemoryState& m1, const MemoryState& m2, const Heap& h_a,
                                  const Heap& h_b, unsigned alpha1, unsigned alpha2) {
  if (alpha1 < 1 || alpha2 < 1) throw SplitError("match_split: alphas must be >= 1");
  if (m1.q != m2.q) throw SplitError("match_split: states differ in q");
  Heap whole;
  try {
    whole = compose(h_a, h_b);
  } catch (const OverlapError&) {
    throw SplitError("match_split: parts overlap");
  }
  if (whole != m1.heap) throw SplitError("match_split: parts do not compose to the first heap");
  SupportGraph g1 = build(m1), g2 = build(m2);
  auto f = graph_map(g1, g2, alpha1 + alpha2);
  if (!f) throw SplitError("match_split: states are not equivalent at alpha1 + alpha2");

  Heap out_a, out_b;
  auto put = [&](Loc l, bool to_a) { (to_a ? out_a : out_b)[l] = m2.heap.at(l); };
  // C1
  for (Loc l : g1.rho) put(f->at(l), h_a.count(l) > 0);
  // C2 and C3 share the count rule; the constrained part takes the first cells
  auto distribute = [&](std::size_t n1, std::size_t n2, const std::vector<Loc>& target) {
    std::size_t take_a;
    if (n1 < alpha1) take_a = n1;
    else if (n2 < alpha2) take_a = target.size() - n2;
    else take_a = alpha1;
    bool a_first = !(n1 >= alpha1 && n2 < alpha2);
    std::size_t first = a_first ? take_a : target.size() - take_a;
    for (std::size_t k = 0; k < target.size(); ++k) put(target[k], (k < first) == a_first);
  };
  for (auto& [e, cells] : g1.btw) {
    std::size_t n1 = 0;
    for (Loc c : cells) n1 += h_a.count(c);
    distribute(n1, cells.size() - n1, g2.btw.at({f->at(e.first), f->at(e.second)}));
  }
  std::size_t r1 = 0;
  for (Loc c : g1.rem) r1 += h_a.count(c);
  distribute(r1, g1.rem.size() - r1, std::vector<Loc>(g2.rem.begin(), g2.rem.end()));
  return {out_a, out_b};
}

std::uint64_t kappa(std::uint64_t q, std::uint64_t n) { return (q * q + q) * (n + 1) + n; }

MemoryState shrink(const MemoryState& m, unsigned alpha) {
  if (alpha < 1) throw std::invalid_argument("shrink: alpha must be >= 1");
  SupportGraph g = build(m);
  std::set<Loc> rel = relevant_locations(m);
  Loc star = rel.empty() ? 0 : *rel.rbegin() + 1;
  Heap h;
  std::size_t kept = 0;
  for (Loc r : g.rem) {
    if (kept++ == alpha) break;
    h[r] = star;
  }
  for (auto& [e, cells] : g.btw) {
    if (cells.size() <= alpha) {
      for (Loc c : cells) h[c] = m.heap.at(c);
      continue;
    }
    for (unsigned k = 0; k + 1 < alpha; ++k) h[cells[k]] = cells[k + 1];
    h[cells[alpha - 1]] = e.second;
  }
  // the first btw cell is h(l) itself, so this agrees with the contracted chain
  for (Loc l : g.rho) h[l] = m.heap.at(l);
  return make_state(m.store, h);
}

}  // namespace slr
