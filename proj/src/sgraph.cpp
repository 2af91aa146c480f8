#include "slr/sgraph.hpp"

#include <algorithm>
#include <sstream>

namespace slr {

std::string to_string(const Term& t) {
  if (t.kind == Term::Kind::Var) return "x" + std::to_string(t.i);
  return "m(x" + std::to_string(t.i) + ",x" + std::to_string(t.j) + ")";
}

std::vector<Term> all_terms(int q) {
  std::vector<Term> out;
  for (VarId i = 1; i <= q; ++i) out.push_back(Term::var(i));
  for (VarId i = 1; i <= q; ++i)
    for (VarId j = 1; j <= q; ++j) out.push_back(Term::meet(i, j));
  return out;
}

std::size_t term_index(const Term& t, int q) {
  if (t.kind == Term::Kind::Var) return static_cast<std::size_t>(t.i - 1);
  return static_cast<std::size_t>(q + (t.i - 1) * q + (t.j - 1));
}

namespace {

// h^0(l), h^1(l), ... until undefined or a repeat.
std::vector<Loc> walk(const Heap& h, Loc l) {
  std::vector<Loc> out{l};
  std::set<Loc> seen{l};
  for (;;) {
    auto it = h.find(out.back());
    if (it == h.end() || !seen.insert(it->second).second) break;
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::optional<Loc> meet_point(const MemoryState& m, VarId i, VarId j) {
  std::vector<Loc> pi = walk(m.heap, m.s(i));
  std::vector<Loc> pj = walk(m.heap, m.s(j));
  std::set<Loc> rj(pj.begin(), pj.end());
  // the first condition plus minimality of L1 pick the first hit
  auto hit = std::find_if(pi.begin(), pi.end(), [&](Loc l) { return rj.count(l) > 0; });
  if (hit == pi.end()) return std::nullopt;
  std::set<Loc> vars(m.store.begin(), m.store.end());
  for (Loc l : walk(m.heap, *hit))
    if (vars.count(l)) return *hit;
  return std::nullopt;
}

std::optional<Loc> term_value(const MemoryState& m, const Term& t) {
  if (t.kind == Term::Kind::Var) return m.s(t.i);
  return meet_point(m, t.i, t.j);
}

std::optional<int> meet_shape(const MemoryState& m, VarId i, VarId j) {
  auto l = meet_point(m, i, j);
  if (!l) return std::nullopt;
  std::vector<Loc> w = walk(m.heap, *l);
  // the walk ends in a cycle iff the last cell points back into it
  std::set<Loc> cycle;
  auto it = m.heap.find(w.back());
  if (it != m.heap.end()) {
    auto start = std::find(w.begin(), w.end(), it->second);
    cycle.insert(start, w.end());
  }
  bool on_loop = false;
  for (Loc v : m.store) on_loop |= cycle.count(v) > 0;
  if (!on_loop) return 1;
  return meet_point(m, j, i) == l ? 2 : 3;
}

std::size_t SupportGraph::btw_size(Loc l) const { return btw.at({l, E.at(l)}).size(); }

SupportGraph build(const MemoryState& m) {
  SupportGraph g;
  g.q = m.q;
  std::vector<Term> terms = all_terms(m.q);
  for (const Term& t : terms) {
    auto v = term_value(m, t);
    g.value.push_back(v);
    if (!v) continue;
    g.V.insert(*v);
    g.labels[*v].push_back(t);
  }
  std::set<Loc> covered;
  for (Loc l : g.V) {
    if (!m.heap.count(l)) continue;
    g.rho.insert(l);
    std::vector<Loc> path;
    Loc cur = m.heap.at(l);
    // stop at the first labelled location; a walk that neither meets V nor
    // leaves dom(h) is trapped in an unlabelled cycle
    bool edge = false;
    while (path.size() <= m.heap.size()) {
      if (g.V.count(cur)) {
        edge = true;
        break;
      }
      auto it = m.heap.find(cur);
      if (it == m.heap.end()) break;
      path.push_back(cur);
      cur = it->second;
    }
    if (!edge) continue;
    g.E[l] = cur;
    covered.insert(path.begin(), path.end());
    g.btw[{l, cur}] = std::move(path);
  }
  for (auto& [l, v] : m.heap)
    if (!g.rho.count(l) && !covered.count(l)) g.rem.insert(l);
  return g;
}

std::string dump(const SupportGraph& g) {
  std::ostringstream os;
  os << "q=" << g.q << "\n";
  for (Loc l : g.V) {
    os << "vertex " << l << (g.rho.count(l) ? " alloc" : "") << " labels";
    for (const Term& t : g.labels.at(l)) os << " " << to_string(t);
    os << "\n";
  }
  for (auto& [l, r] : g.E) os << "edge " << l << " -> " << r << " btw " << g.btw.at({l, r}).size() << "\n";
  os << "rem " << g.rem.size() << "\n";
  return os.str();
}

}  // namespace slr
