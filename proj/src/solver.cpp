#include "slr/solver.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "slr/sgraph.hpp"
#include "slr/testform.hpp"

namespace slr {

std::string to_string(SatResult::Status s) {
  switch (s) {
    case SatResult::Status::Sat: return "SAT";
    case SatResult::Status::Unsat: return "UNSAT";
    case SatResult::Status::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

// ------------------------------------------------------------ state keys

// Equal keys imply isomorphic states (the converse need not hold).
std::string state_key(const MemoryState& m) {
  std::map<Loc, std::uint32_t> lab;
  std::vector<Loc> order;
  auto visit = [&](Loc l) {
    while (!lab.count(l)) {
      lab[l] = static_cast<std::uint32_t>(order.size());
      order.push_back(l);
      auto it = m.heap.find(l);
      if (it == m.heap.end()) break;
      l = it->second;
    }
  };
  for (Loc l : m.store) visit(l);
  for (auto& [l, v] : m.heap) visit(l);
  std::string key;
  auto put = [&key](std::uint32_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put(static_cast<std::uint32_t>(m.q));
  for (Loc l : m.store) put(lab[l]);
  for (Loc l : order) {
    auto it = m.heap.find(l);
    put(it == m.heap.end() ? 0 : lab[it->second] + 1);
  }
  return key;
}

// ------------------------------------------------------------ atoms

std::optional<Loc> next(const Heap& h, Loc l) {
  auto it = h.find(l);
  if (it == h.end()) return std::nullopt;
  return it->second;
}

bool path_plus(const Heap& h, Loc from, Loc to) {
  auto cur = next(h, from);
  for (std::size_t steps = 0; cur && steps <= h.size(); ++steps) {
    if (*cur == to) return true;
    cur = next(h, *cur);
  }
  return false;
}

bool precise_list(const Heap& h, Loc from, Loc to) {
  std::size_t used = 0;
  Loc cur = from;
  while (cur != to) {
    auto n = next(h, cur);
    if (!n || ++used > h.size()) return false;
    cur = *n;
  }
  return used == h.size();
}

// ------------------------------------------------------------ abstract evaluation

// Split choices for a group of n cells when the parts only matter up to
// a1 and a2: exact counts below the thresholds, one saturated representative.
std::vector<std::size_t> split_counts(std::size_t n, unsigned a1, unsigned a2) {
  std::vector<std::size_t> out;
  bool saturated = false;
  for (std::size_t k = 0; k <= n; ++k) {
    if (k < a1 || n - k < a2) {
      out.push_back(k);
    } else if (!saturated) {
      out.push_back(k);
      saturated = true;
    }
  }
  return out;
}

class AbsEval {
 public:
  bool eval(const MemoryState& m, const Formula& f) {
    auto S = [&](VarId v) { return m.s(v); };
    switch (f->kind) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::Emp: return m.heap.empty();
      case Kind::Eq: return S(f->x) == S(f->y);
      case Kind::PointsTo: {
        auto n = next(m.heap, S(f->x));
        return n && *n == S(f->y);
      }
      case Kind::Ls: return precise_list(m.heap, S(f->x), S(f->y));
      case Kind::Reach: return S(f->x) == S(f->y) || path_plus(m.heap, S(f->x), S(f->y));
      case Kind::ReachPlus: return path_plus(m.heap, S(f->x), S(f->y));
      case Kind::Not: return !eval(m, f->l);
      case Kind::And: return eval(m, f->l) && eval(m, f->r);
      case Kind::Star: return star(m, f);
      case Kind::Wand: throw FragmentError("check_abstract: formula contains -*");
    }
    return false;
  }

 private:
  static constexpr std::size_t kMemoCap = 4'000'000;
  std::unordered_map<std::string, bool> memo_;

  bool star(const MemoryState& m, const Formula& f) {
    const FormulaNode* node = f.get();
    std::string key(reinterpret_cast<const char*>(&node), sizeof node);
    key += state_key(m);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool r = split(m, f);
    if (memo_.size() >= kMemoCap) memo_.clear();
    memo_.emplace(std::move(key), r);
    return r;
  }

  bool split(const MemoryState& m, const Formula& f) {
    SupportGraph g = build(m);
    unsigned a1 = msize(f->l), a2 = msize(f->r);
    std::vector<Loc> rho(g.rho.begin(), g.rho.end());
    std::vector<std::vector<Loc>> groups;
    for (auto& [e, cells] : g.btw)
      if (!cells.empty()) groups.push_back(cells);
    groups.emplace_back(g.rem.begin(), g.rem.end());
    std::vector<std::vector<std::size_t>> choices;
    for (auto& grp : groups) choices.push_back(split_counts(grp.size(), a1, a2));

    std::vector<std::size_t> pick(groups.size(), 0);
    for (std::uint64_t mask = 0; mask < (1ULL << rho.size()); ++mask) {
      std::fill(pick.begin(), pick.end(), 0);
      for (;;) {
        MemoryState m1 = make_state(m.store, {}), m2 = make_state(m.store, {});
        for (std::size_t i = 0; i < rho.size(); ++i)
          ((mask >> i) & 1 ? m1 : m2).heap[rho[i]] = m.heap.at(rho[i]);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
          std::size_t k = choices[gi][pick[gi]];
          for (std::size_t c = 0; c < groups[gi].size(); ++c)
            (c < k ? m1 : m2).heap[groups[gi][c]] = m.heap.at(groups[gi][c]);
        }
        if (eval(m1, f->l) && eval(m2, f->r)) return true;
        std::size_t gi = 0;
        while (gi < groups.size() && ++pick[gi] == choices[gi].size()) pick[gi++] = 0;
        if (gi == groups.size()) break;
      }
    }
    return false;
  }
};

// ------------------------------------------------------------ normal forms

// States shaped like the output of shrink at alpha: labelled nodes (the
// store classes plus extra meet points) linked by chains of at most alpha
// cells, allocated nodes whose walk leaves the labelled part, and at most
// alpha stray cells.  Every state is equivalent at alpha to one of these.
class NormalForms {
 public:
  NormalForms(int q, unsigned alpha) : q_(q), alpha_(alpha) {}

  std::size_t max_cells() const {
    std::size_t nodes = static_cast<std::size_t>(q_) * static_cast<std::size_t>(q_);
    return nodes * (alpha_ + 1) + alpha_;
  }

  // Calls fn on each normal form with exactly `cells` cells until it returns true.
  bool each(std::size_t cells, const std::function<bool(const MemoryState&)>& fn) {
    std::vector<Loc> store(static_cast<std::size_t>(q_));
    std::function<bool(int, int)> stores = [&](int i, int classes) -> bool {
      if (i == q_) {
        for (int e = 0; e <= q_ * (q_ - 1); ++e)
          if (shapes(store, static_cast<std::size_t>(classes), static_cast<std::size_t>(e), cells, fn))
            return true;
        return false;
      }
      for (int c = 0; c <= classes; ++c) {
        store[static_cast<std::size_t>(i)] = static_cast<Loc>(c);
        if (stores(i + 1, std::max(classes, c + 1))) return true;
      }
      return false;
    };
    return stores(0, 0);
  }

 private:
  int q_;
  unsigned alpha_;

  bool shapes(const std::vector<Loc>& store, std::size_t p, std::size_t e, std::size_t cells,
              const std::function<bool(const MemoryState&)>& fn) {
    std::size_t n = p + e;
    // option 0: unallocated, 1: dangling, 2 + t * (alpha+1) + c: chain of c cells to node t
    std::size_t opts = 2 + n * (alpha_ + 1);
    std::vector<std::size_t> opt(n, 0);
    auto cost = [&](std::size_t o) -> std::size_t {
      if (o == 0) return 0;
      if (o == 1) return 1;
      return 1 + (o - 2) % (alpha_ + 1);
    };
    std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t i, std::size_t used) -> bool {
      if (cells - used > alpha_ + (n - i) * (alpha_ + 1)) return false;
      if (i == n) return emit(store, p, e, opt, cells - used, fn);
      // a meet point outside the store reaches a variable, so it is allocated
      for (std::size_t o = i < p ? 0 : 2; o < opts; ++o) {
        std::size_t c = cost(o);
        if (used + c > cells) continue;
        opt[i] = o;
        if (choose(i + 1, used + c)) return true;
      }
      return false;
    };
    return choose(0, 0);
  }

  bool emit(const std::vector<Loc>& store, std::size_t p, std::size_t e, const std::vector<std::size_t>& opt,
            std::size_t rem, const std::function<bool(const MemoryState&)>& fn) {
    std::size_t n = p + e;
    // ... and is entered from two distinct predecessors
    std::vector<int> indeg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (opt[i] >= 2) ++indeg[(opt[i] - 2) / (alpha_ + 1)];
    for (std::size_t k = p; k < n; ++k)
      if (indeg[k] < 2) return false;
    Loc fresh = n;
    std::vector<std::pair<Loc, Loc>> cells;
    std::vector<std::size_t> dangling;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t o = opt[i];
      if (o == 0) continue;
      if (o == 1) {
        dangling.push_back(i);
        continue;
      }
      Loc target = (o - 2) / (alpha_ + 1);
      std::size_t len = (o - 2) % (alpha_ + 1);
      Loc cur = i;
      for (std::size_t k = 0; k < len; ++k) {
        cells.emplace_back(cur, fresh);
        cur = fresh++;
      }
      cells.emplace_back(cur, target);
    }
    std::vector<Loc> strays;
    for (std::size_t k = 0; k < rem; ++k) strays.push_back(fresh++);
    Loc star = fresh;
    Heap h(cells.begin(), cells.end());
    for (std::size_t i : dangling) h[i] = star;
    for (Loc r : strays) h[r] = star;
    MemoryState m = make_state(store, std::move(h));
    if (e > 0) {
      // extra nodes must be meet points, listed by their first meet term
      SupportGraph g = build(m);
      std::vector<std::size_t> first(e, SIZE_MAX);
      for (std::size_t t = 0; t < g.value.size(); ++t) {
        if (!g.value[t] || *g.value[t] < p || *g.value[t] >= n) continue;
        std::size_t k = *g.value[t] - p;
        first[k] = std::min(first[k], t);
      }
      for (std::size_t k = 0; k < e; ++k) {
        if (first[k] == SIZE_MAX) return false;
        if (k > 0 && first[k] < first[k - 1]) return false;
      }
    }
    return fn(m);
  }
};

int var_count(const Formula& f) { return std::max<int>(1, max_var(f)); }

Formula rebuild(const Formula& f, std::map<const FormulaNode*, Formula>& memo,
                const std::function<std::optional<Formula>(const Formula&)>& leaf) {
  if (auto it = memo.find(f.get()); it != memo.end()) return it->second;
  Formula out;
  if (auto r = leaf(f)) out = *r;
  else if (f->kind == Kind::Not) out = lnot(rebuild(f->l, memo, leaf));
  else if (f->kind == Kind::And) out = land(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf));
  else if (f->kind == Kind::Star) out = star(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf));
  else if (f->kind == Kind::Wand) out = wand(rebuild(f->l, memo, leaf), rebuild(f->r, memo, leaf));
  else out = f;
  memo.emplace(f.get(), out);
  return out;
}

// Minimal-first search over normal forms at alpha.
SatResult search(int q, unsigned alpha, const std::function<bool(const MemoryState&)>& holds) {
  SatResult res;
  NormalForms nf(q, alpha);
  for (std::size_t c = 0; c <= nf.max_cells(); ++c) {
    bool found = nf.each(c, [&](const MemoryState& m) {
      ++res.explored;
      if (!holds(m)) return false;
      res.model = m;
      return true;
    });
    if (found) {
      res.status = SatResult::Status::Sat;
      return res;
    }
  }
  res.status = SatResult::Status::Unsat;
  return res;
}

void verify(const SatResult& r, const std::function<bool(const MemoryState&)>& check) {
  if (r.model && !check(*r.model))
    throw std::logic_error("solver produced a model that fails re-checking: " + show(*r.model));
}

}  // namespace

bool check_abstract(const MemoryState& m, const Formula& f) {
  if (max_var(f) > m.q) throw std::invalid_argument("check_abstract: variable beyond the store");
  AbsEval ev;
  return ev.eval(m, f);
}

SatResult sat_reachplus(const Formula& f) {
  Formula g = rewrite_reach(f, ReachTarget::ReachPlus);
  if (!in_fragment(g, Fragment::SL_STAR_REACHPLUS))
    throw FragmentError("sat_reachplus: formula is not in SL(*, reach+)");
  int q = var_count(g);
  unsigned alpha = std::max(1u, msize(g));
  AbsEval ev;
  SatResult r = search(q, alpha, [&](const MemoryState& m) { return ev.eval(m, g); });
  r.bound = kappa(static_cast<std::uint64_t>(q), size(f));
  verify(r, [&](const MemoryState& m) { return check_exact(m, f); });
  return r;
}

Formula shf_rewrite(const Formula& f) {
  std::map<const FormulaNode*, Formula> memo;
  return rebuild(f, memo, [](const Formula& a) -> std::optional<Formula> {
    if (auto pt = match_mapsto(a)) return land(pointsto(pt->first, pt->second), size_eq(1));
    if (a->kind != Kind::Ls) return std::nullopt;
    VarId x = a->x, y = a->y;
    return lor(land(eq(x, y), emp()),
               land(land(neq(x, y), reachplus(x, y)), lnot(star(lnot(emp()), reachplus(x, y)))));
  });
}

SatResult sat_bool_shf(const Formula& f) {
  if (!in_fragment(f, Fragment::BOOL_SHF)) throw FragmentError("sat_bool_shf: formula is not in Bool(SHF)");
  Formula g = shf_rewrite(f);
  SatResult r = sat_reachplus(g);
  r.bound = kappa(static_cast<std::uint64_t>(var_count(g)), size(g));
  verify(r, [&](const MemoryState& m) { return check_exact(m, f); });
  return r;
}

namespace {

struct Leaf {
  Formula f;
  bool wand;
};

// Collect the maximal subformulae below the Boolean skeleton.
void leaves(const Formula& f, std::vector<Leaf>& out) {
  if (in_fragment(f, Fragment::SL_STAR_REACHPLUS)) {
    out.push_back({f, false});
    return;
  }
  if (in_fragment(f, Fragment::SL_STAR_WAND)) {
    out.push_back({f, true});
    return;
  }
  if (f->kind == Kind::Not) return leaves(f->l, out);
  if (f->kind == Kind::And) {
    leaves(f->l, out);
    leaves(f->r, out);
    return;
  }
  throw FragmentError("sat_boolcomb: " + print(f) + " mixes -* with reachability");
}

}  // namespace

MemoryState wand_view(const MemoryState& m, std::size_t others) {
  std::set<Loc> vars(m.store.begin(), m.store.end());
  std::set<Loc> rel = relevant_locations(m);
  Loc spare = rel.empty() ? 0 : *rel.rbegin() + 1;
  MemoryState out = make_state(m.store, {});
  for (auto& [l, v] : m.heap) {
    if (vars.count(l)) out.heap[l] = v;
    else if (others > 0) {
      out.heap[l] = spare;
      --others;
    }
  }
  return out;
}

namespace {

// Adds n cells to a group that already holds alpha cells, so the profile at
// alpha is unchanged.  Absent if no group is saturated.
std::optional<MemoryState> pad(const MemoryState& m, std::size_t n, unsigned alpha) {
  if (n == 0) return m;
  SupportGraph g = build(m);
  std::set<Loc> rel = relevant_locations(m);
  Loc fresh = *rel.rbegin() + 1;
  MemoryState out = m;
  if (g.rem.size() >= alpha) {
    Loc target = m.heap.at(*g.rem.begin());
    for (std::size_t k = 0; k < n; ++k) out.heap[fresh++] = target;
    return out;
  }
  for (auto& [e, cells] : g.btw) {
    if (cells.size() < alpha) continue;
    Loc cur = cells.back();
    for (std::size_t k = 0; k < n; ++k) {
      out.heap[cur] = fresh;
      cur = fresh++;
    }
    out.heap[cur] = e.second;
    return out;
  }
  return std::nullopt;
}

}  // namespace

SatResult sat_boolcomb(const Formula& f) {
  if (!in_fragment(f, Fragment::BOOLCOMB))
    throw FragmentError("sat_boolcomb: not a Boolean combination of SL(*,-*) and SL(*,reach+)");
  std::vector<Leaf> ls;
  leaves(f, ls);
  int q = var_count(f);
  // Reach leaves fix alpha.  Wand leaves only see the cells at variables and
  // how many other cells there are (up to their size), so normal forms at
  // alpha are padded with up to `extra` cells in a saturated group.
  unsigned alpha = 1;
  std::size_t extra = 0;
  unsigned wand_bound = 0;
  std::map<const FormulaNode*, std::size_t> index;
  std::vector<Checker> checkers;
  std::vector<Formula> rewritten;
  for (const Leaf& l : ls) {
    if (index.count(l.f.get())) continue;
    index[l.f.get()] = rewritten.size();
    if (l.wand) {
      auto b = static_cast<unsigned>(sl_star_wand_bound(l.f));
      wand_bound = std::max(wand_bound, b);
      extra = std::max<std::size_t>(extra, size(l.f) + static_cast<std::size_t>(q));
      checkers.emplace_back(WandPolicy::bounded(b, b));
      rewritten.push_back(l.f);
    } else {
      Formula g = rewrite_reach(l.f, ReachTarget::ReachPlus);
      alpha = std::max(alpha, msize(g));
      checkers.emplace_back();
      rewritten.push_back(g);
    }
  }
  AbsEval ev;
  std::function<bool(const MemoryState&, const Formula&)> holds = [&](const MemoryState& m,
                                                                      const Formula& g) -> bool {
    if (auto it = index.find(g.get()); it != index.end()) {
      const Formula& leaf = rewritten[it->second];
      if (has_wand(leaf)) return checkers[it->second].check(wand_view(m, size(leaf)), leaf).value;
      return ev.eval(m, leaf);
    }
    if (g->kind == Kind::Not) return !holds(m, g->l);
    return holds(m, g->l) && holds(m, g->r);
  };

  SatResult r;
  NormalForms nf(q, alpha);
  // ascending total cell count, padding included
  for (std::size_t c = 0; c <= nf.max_cells() + extra && !r.model; ++c) {
    for (std::size_t p = 0; p <= std::min(c, extra) && !r.model; ++p) {
      if (c - p > nf.max_cells()) continue;
      nf.each(c - p, [&](const MemoryState& m) {
        auto padded = pad(m, p, alpha);
        if (!padded) return false;
        ++r.explored;
        if (!holds(*padded, f)) return false;
        r.model = *padded;
        return true;
      });
    }
  }
  r.status = r.model ? SatResult::Status::Sat : SatResult::Status::Unsat;
  r.bound = kappa(static_cast<std::uint64_t>(q), size(f) * size(f));
  WandPolicy p = WandPolicy::bounded(std::max(wand_bound, 1u), std::max(wand_bound, 1u));
  verify(r, [&](const MemoryState& m) { return check(m, f, p).value; });
  return r;
}

SatResult solve(const Formula& f, SolverChoice how) {
  switch (how) {
    case SolverChoice::ReachPlus: return sat_reachplus(f);
    case SolverChoice::BoolShf: return sat_bool_shf(f);
    case SolverChoice::BoolComb: return sat_boolcomb(f);
    case SolverChoice::Auto: break;
  }
  if (!has_wand(f)) return in_fragment(f, Fragment::BOOL_SHF) ? sat_bool_shf(f) : sat_reachplus(f);
  return sat_boolcomb(f);
}

Entailment entails(const Formula& f, const Formula& g) {
  SatResult r = solve(land(f, lnot(g)));
  return {r.status == SatResult::Status::Unsat, r.model};
}

SatResult brute_sat(const Formula& f, unsigned max_cells, unsigned max_locs, const WandPolicy& policy) {
  int q = var_count(f);
  SatResult res;
  Checker c(policy);
  std::set<Loc> universe;
  for (Loc l = 0; l < max_locs; ++l) universe.insert(l);
  std::vector<Loc> store(static_cast<std::size_t>(q));
  struct Found {};
  try {
    for_each_extension({}, universe, max_cells, [&](const Heap& h) {
      // restricted-growth stores; together with all heaps this covers every
      // state up to renaming
      std::function<void(int, Loc)> stores = [&](int i, Loc classes) {
        if (i == q) {
          ++res.explored;
          MemoryState m = make_state(store, h);
          if (c.check(m, f).value) {
            res.model = m;
            throw Found{};
          }
          return;
        }
        for (Loc v = 0; v <= classes && v < max_locs; ++v) {
          store[static_cast<std::size_t>(i)] = v;
          stores(i + 1, std::max(classes, v + 1));
        }
      };
      if (max_locs > 0) stores(0, 0);
    });
  } catch (const Found&) {
    res.status = SatResult::Status::Sat;
    return res;
  }
  std::uint64_t k = kappa(static_cast<std::uint64_t>(q), size(f));
  res.bound = k;
  bool covers = !has_wand(f) && max_cells >= k && max_locs >= 2 * k + static_cast<std::uint64_t>(q);
  res.status = covers ? SatResult::Status::Unsat : SatResult::Status::Unknown;
  return res;
}

}  // namespace slr
