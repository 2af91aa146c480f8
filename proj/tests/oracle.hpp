// Naive reference implementations used only by the tests.  Nothing here shares
// code with the library beyond the AST and memstate enumeration helpers.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "slr/formula.hpp"
#include "slr/memstate.hpp"

namespace oracle {

using namespace slr;

inline std::optional<Loc> next(const Heap& h, Loc l) {
  auto it = h.find(l);
  if (it == h.end()) return std::nullopt;
  return it->second;
}

// h^i(l) = l' for some i >= 1
inline bool path_plus(const Heap& h, Loc l, Loc target) {
  std::set<Loc> seen;
  auto cur = next(h, l);
  while (cur) {
    if (*cur == target) return true;
    if (!seen.insert(*cur).second) return false;
    cur = next(h, *cur);
  }
  return false;
}

inline bool precise_list(const Heap& h, Loc from, Loc to) {
  if (from == to) return h.empty();
  std::set<Loc> used;
  Loc cur = from;
  while (cur != to) {
    auto n = next(h, cur);
    if (!n || used.count(cur)) return false;
    used.insert(cur);
    cur = *n;
  }
  return used.size() == h.size();
}

struct Policy {
  unsigned cells = 0;
  unsigned fresh = 1;
};

// Direct recursion over the satisfaction clauses.  Wands quantify over every
// extension within the universe s(vars) + dom + ran + `fresh` new naturals.
inline bool sat(const std::vector<Loc>& s, const Heap& h, const Formula& f, const Policy& p) {
  auto S = [&](VarId v) { return s.at(static_cast<std::size_t>(v - 1)); };
  switch (f->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Emp: return h.empty();
    case Kind::Eq: return S(f->x) == S(f->y);
    case Kind::PointsTo: {
      auto n = next(h, S(f->x));
      return n && *n == S(f->y);
    }
    case Kind::Ls: return precise_list(h, S(f->x), S(f->y));
    case Kind::Reach: return S(f->x) == S(f->y) || path_plus(h, S(f->x), S(f->y));
    case Kind::ReachPlus: return path_plus(h, S(f->x), S(f->y));
    case Kind::Not: return !sat(s, h, f->l, p);
    case Kind::And: return sat(s, h, f->l, p) && sat(s, h, f->r, p);
    case Kind::Star: {
      bool found = false;
      for (const Heap& h1 : subheaps(h)) {
        if (found) break;
        Heap h2;
        for (auto& [l, v] : h)
          if (!h1.count(l)) h2[l] = v;
        found = sat(s, h1, f->l, p) && sat(s, h2, f->r, p);
      }
      return found;
    }
    case Kind::Wand: {
      std::set<Loc> u;
      for (VarId v : vars(f)) u.insert(S(v));
      for (auto& [l, v] : h) {
        u.insert(l);
        u.insert(v);
      }
      Loc cand = 0;
      for (unsigned k = 0; k < p.fresh; ++k) {
        while (u.count(cand)) ++cand;
        u.insert(cand);
      }
      bool ok = true;
      for_each_extension(h, u, p.cells, [&](const Heap& e) {
        if (!ok) return;
        if (sat(s, e, f->l, p) && !sat(s, compose(h, e), f->r, p)) ok = false;
      });
      return ok;
    }
  }
  return false;
}

inline bool sat(const MemoryState& m, const Formula& f, const Policy& p = {}) {
  return sat(m.store, m.heap, f, p);
}

// Every state with the given number of variables, at most max_cells cells and
// all locations drawn from [0, nlocs).
inline void for_each_state(int q, unsigned max_cells, unsigned nlocs,
                           const std::function<void(const MemoryState&)>& fn) {
  std::vector<Loc> store(static_cast<std::size_t>(q), 0);
  std::function<void(int)> stores = [&](int i) {
    if (i == q) {
      std::set<Loc> u;
      for (Loc l = 0; l < nlocs; ++l) u.insert(l);
      for_each_extension({}, u, max_cells, [&](const Heap& h) { fn(make_state(store, h)); });
      return;
    }
    for (Loc l = 0; l < nlocs; ++l) {
      store[static_cast<std::size_t>(i)] = l;
      stores(i + 1);
    }
  };
  stores(0);
}

// Same, restricted to states whose store values appear in first-use order.
inline void for_each_state_canonical(int q, unsigned max_cells, unsigned nlocs,
                                     const std::function<void(const MemoryState&)>& fn) {
  for_each_state(q, max_cells, nlocs, [&](const MemoryState& m) {
    // the store must be a restricted-growth string; heap cells stay
    // unrestricted so every shape still appears
    Loc bound = 0;
    for (Loc l : m.store) {
      if (l > bound) return;
      if (l == bound) ++bound;
    }
    fn(m);
  });
}

// Random formula generator over q variables.
struct Gen {
  std::mt19937_64 rng;
  int q;
  bool wands = false;
  bool reach_atoms = true;
  bool pto_atoms = true;

  Gen(std::uint64_t seed, int q_) : rng(seed), q(q_) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  VarId var() { return 1 + pick(q); }

  Formula atom() {
    int choices = 3 + (pto_atoms ? 1 : 0) + (reach_atoms ? 3 : 0);
    int c = pick(choices);
    if (c == 0) return emp();
    if (c == 1) return eq(var(), var());
    if (c == 2) return pick(2) ? mk_true() : mk_false();
    c -= 3;
    if (pto_atoms) {
      if (c == 0) return pointsto(var(), var());
      --c;
    }
    if (c == 0) return ls(var(), var());
    if (c == 1) return reach(var(), var());
    return reachplus(var(), var());
  }

  // formula with exactly `n` nodes (n >= 1)
  Formula sized(int n) {
    if (n == 1) return atom();
    if (n == 2) return lnot(atom());
    int c = pick(wands ? 4 : 3);
    if (c == 0) return lnot(sized(n - 1));
    int left = 1 + pick(n - 2);
    Formula a = sized(left), b = sized(n - 1 - left);
    if (c == 1) return land(a, b);
    if (c == 2) return star(a, b);
    return wand(a, b);
  }
};

}  // namespace oracle
