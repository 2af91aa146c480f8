#include "slr/mcheck.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <string>
#include <unordered_map>

namespace slr {

namespace {

constexpr std::uint64_t kAll = ~0ULL;
constexpr unsigned kInf = std::numeric_limits<unsigned>::max() / 4;
constexpr std::size_t kMemoCap = 6'000'000;

inline bool has(std::uint64_t m, unsigned i) { return (m >> i) & 1ULL; }
inline std::uint64_t bit(unsigned i) { return 1ULL << i; }
inline unsigned pc(std::uint64_t m) { return static_cast<unsigned>(std::popcount(m)); }
inline unsigned hi(std::uint64_t m) { return m ? 63u - static_cast<unsigned>(std::countl_zero(m)) : 0u; }

// {i + j | i in a, j in b}, truncated at 63 (larger heaps never occur).
std::uint64_t sumset(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  while (a) {
    unsigned i = static_cast<unsigned>(std::countr_zero(a));
    a &= a - 1;
    out |= b << i;
  }
  return out;
}

unsigned sat_add(unsigned a, unsigned b) { return std::min(kInf, a + b); }
std::uint64_t sat_add64(std::uint64_t a, std::uint64_t b) { return std::min<std::uint64_t>(1ULL << 40, a + b); }

struct Node {
  Kind kind;
  int x = 0, y = 0;
  int l = -1, r = -1;
  std::uint64_t varmask = 0;
  bool alloc_pat = false;
  bool or_pat = false;
  int or_a = -1, or_b = -1;
  bool wand_free = true;
  bool reach_free = true;  // no ls, reach or reach+ below
  std::uint64_t size = 1;
  bool memo = false;
  std::uint64_t cost = 1;
};

struct St {
  std::uint64_t dom = 0;
  std::array<std::uint8_t, 64> nxt{};
};

}  // namespace

struct Checker::Impl {
  WandPolicy policy;
  CheckStats stats;

  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, int> table;
  std::unordered_map<const FormulaNode*, int> by_ptr;
  std::vector<Formula> keep;

  // per-check analyses
  std::vector<std::uint64_t> may, must, req, forb;
  std::vector<unsigned> wit;
  std::vector<std::uint8_t> uc, dc;
  std::vector<std::uint32_t> stamp;
  std::uint32_t cur_stamp = 0;

  std::array<int, kMaxVar + 1> sidx{};

  std::unordered_map<std::string, bool> memo;

  explicit Impl(WandPolicy p) : policy(p) {
    if (policy.mode == WandPolicy::Mode::Bounded && policy.fresh_locations < 1)
      throw std::invalid_argument("bounded wand policy needs at least one fresh location");
  }

  // ------------------------------------------------------------ compile

  int intern(Node n) {
    std::uint64_t key = static_cast<std::uint64_t>(n.kind) | (static_cast<std::uint64_t>(n.x) << 4) |
                        (static_cast<std::uint64_t>(n.y) << 10) |
                        (static_cast<std::uint64_t>(n.l + 1) << 16) |
                        (static_cast<std::uint64_t>(n.r + 1) << 40);
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    if (id >= (1 << 23)) throw std::length_error("formula too large");
    n.reach_free = n.kind != Kind::Ls && n.kind != Kind::Reach && n.kind != Kind::ReachPlus;
    if (n.l >= 0) {
      n.varmask |= nodes[n.l].varmask;
      n.wand_free = n.wand_free && nodes[n.l].wand_free;
      n.reach_free = n.reach_free && nodes[n.l].reach_free;
      n.size = sat_add64(n.size, nodes[n.l].size);
      n.cost += nodes[n.l].cost;
    }
    if (n.r >= 0) {
      n.varmask |= nodes[n.r].varmask;
      n.wand_free = n.wand_free && nodes[n.r].wand_free;
      n.reach_free = n.reach_free && nodes[n.r].reach_free;
      n.size = sat_add64(n.size, nodes[n.r].size);
      n.cost += nodes[n.r].cost;
    }
    switch (n.kind) {
      case Kind::Eq:
      case Kind::PointsTo:
      case Kind::Ls:
      case Kind::Reach:
      case Kind::ReachPlus: n.varmask |= bit(n.x) | bit(n.y); break;
      case Kind::Not:
        if (nodes[n.l].kind == Kind::And) {
          const Node& c = nodes[n.l];
          if (nodes[c.l].kind == Kind::Not && nodes[c.r].kind == Kind::Not) {
            n.or_pat = true;
            n.or_a = nodes[c.l].l;
            n.or_b = nodes[c.r].l;
          }
        }
        break;
      case Kind::Star:
        n.cost *= 4;
        n.memo = true;
        break;
      case Kind::Wand: {
        const Node& a = nodes[n.l];
        if (a.kind == Kind::PointsTo && a.x == a.y && nodes[n.r].kind == Kind::False) {
          n.alloc_pat = true;
          n.x = a.x;
          n.cost = 2;
        } else {
          n.wand_free = false;
          n.memo = true;
          n.cost = std::min<std::uint64_t>(n.cost * 64, 1ULL << 60);
        }
        break;
      }
      default: break;
    }
    nodes.push_back(n);
    table.emplace(key, id);
    return id;
  }

  int compile(const Formula& f) {
    auto it = by_ptr.find(f.get());
    if (it != by_ptr.end()) return it->second;
    Node n;
    n.kind = f->kind;
    n.x = f->x;
    n.y = f->y;
    if (f->l) n.l = compile(f->l);
    if (f->r) n.r = compile(f->r);
    int id = intern(n);
    by_ptr.emplace(f.get(), id);
    keep.push_back(f);
    return id;
  }

  // ----------------------------------------------------------- analyses

  bool bounded_alloc_exact() const {
    return policy.mode == WandPolicy::Mode::Bounded && policy.cell_bound >= 1;
  }

  void analyse(int id) {
    if (stamp[id] == cur_stamp) return;
    const Node& n = nodes[id];
    if (n.l >= 0) analyse(n.l);
    if (n.r >= 0) analyse(n.r);
    std::uint64_t mv = kAll, mu = 0, rq = 0, fb = 0;
    bool u = false, d = false;
    unsigned w = kInf;
    auto sx = [&] { return static_cast<unsigned>(sidx[n.x]); };
    auto sy = [&] { return static_cast<unsigned>(sidx[n.y]); };
    switch (n.kind) {
      case Kind::True: mv = mu = kAll; u = d = true; w = 0; break;
      case Kind::False: mv = mu = 0; u = d = true; w = 0; break;
      case Kind::Emp: mv = mu = 1; fb = kAll; d = true; w = 0; break;
      case Kind::Eq:
        mv = mu = (sx() == sy()) ? kAll : 0;
        u = d = true;
        w = 0;
        break;
      case Kind::PointsTo: mv = kAll & ~1ULL; rq = bit(sx()); u = true; w = 1; break;
      case Kind::Ls:
        if (sx() == sy()) {
          mv = mu = 1;
          fb = kAll;
          d = true;
          w = 0;
        } else {
          mv = kAll & ~1ULL;
          rq = bit(sx());
        }
        break;
      case Kind::Reach:
        if (sx() == sy()) {
          mv = mu = kAll;
          u = d = true;
          w = 0;
        } else {
          mv = kAll & ~1ULL;
          rq = bit(sx());
          u = true;
        }
        break;
      case Kind::ReachPlus: mv = kAll & ~1ULL; rq = bit(sx()); u = true; break;
      case Kind::Not:
        if (n.or_pat) {
          int a = n.or_a, b = n.or_b;
          mv = may[a] | may[b];
          mu = must[a] | must[b];
          rq = req[a] & req[b];
          fb = forb[a] & forb[b];
          u = uc[a] && uc[b];
          d = dc[a] && dc[b];
          w = std::max(wit[a], wit[b]);
        } else {
          int c = n.l;
          mv = ~must[c];
          mu = ~may[c];
          u = dc[c];
          d = uc[c];
          if (nodes[c].alloc_pat && bounded_alloc_exact()) fb = bit(static_cast<unsigned>(sidx[nodes[c].x]));
        }
        break;
      case Kind::And: {
        int a = n.l, b = n.r;
        mv = may[a] & may[b];
        mu = must[a] & must[b];
        rq = req[a] | req[b];
        fb = forb[a] | forb[b];
        u = uc[a] && uc[b];
        d = dc[a] && dc[b];
        if (u) w = sat_add(wit[a], wit[b]);
        break;
      }
      case Kind::Star: {
        int a = n.l, b = n.r;
        mv = sumset(may[a], may[b]);
        mu = sumset(must[a], must[b]);
        rq = req[a] | req[b];
        fb = forb[a] & forb[b];
        if (req[a] & req[b]) mv = mu = 0;
        u = uc[a] || uc[b];
        d = dc[a] && dc[b];
        w = std::min(sat_add(may[a] ? hi(may[a]) : 0, wit[b]), sat_add(wit[a], may[b] ? hi(may[b]) : 0));
        break;
      }
      case Kind::Wand:
        if (n.alloc_pat) {
          if (bounded_alloc_exact()) {
            mv = kAll & ~1ULL;
            rq = bit(static_cast<unsigned>(sidx[n.x]));
            u = true;
            w = 1;
          } else {
            mv = mu = kAll;
            u = d = true;
            w = 0;
          }
        } else if (may[n.l] == 0) {
          mv = mu = kAll;
          u = d = true;
          w = 0;
        }
        break;
    }
    may[id] = mv;
    must[id] = mu & mv;
    req[id] = rq;
    forb[id] = fb;
    uc[id] = u;
    dc[id] = d;
    wit[id] = std::min(w, mv ? hi(mv) : 0u);
    stamp[id] = cur_stamp;
  }

  // --------------------------------------------------------------- eval

  static std::uint64_t ran_of(const St& st) {
    std::uint64_t r = 0;
    for (std::uint64_t d = st.dom; d; d &= d - 1) r |= bit(st.nxt[std::countr_zero(d)]);
    return r;
  }

  bool walk_plus(unsigned from, unsigned to, const St& st) const {
    std::uint64_t D = st.dom;
    if (!has(D, from)) return false;
    unsigned cur = st.nxt[from];
    for (unsigned i = 0, n = pc(D); i <= n; ++i) {
      if (cur == to) return true;
      if (!has(D, cur)) return false;
      cur = st.nxt[cur];
    }
    return false;
  }

  bool list_seg(unsigned from, unsigned to, const St& st) const {
    if (from == to) return st.dom == 0;
    std::uint64_t seen = 0;
    unsigned cur = from;
    for (;;) {
      if (cur == to) return seen == st.dom;
      if (!has(st.dom, cur) || has(seen, cur)) return false;
      seen |= bit(cur);
      cur = st.nxt[cur];
    }
  }

  std::string memo_key(int id, const St& st) const {
    std::array<std::int8_t, 64> lab;
    lab.fill(-1);
    std::array<std::uint8_t, 64> order{};
    int next = 0;
    std::string key;
    key.reserve(24);
    key.append(reinterpret_cast<const char*>(&id), sizeof id);
    auto visit = [&](unsigned l) {
      const unsigned start = l;
      while (lab[l] < 0) {
        lab[l] = static_cast<std::int8_t>(next);
        order[next++] = static_cast<std::uint8_t>(l);
        if (!has(st.dom, l)) break;
        l = st.nxt[l];
      }
      return static_cast<char>(lab[start]);
    };
    for (std::uint64_t vm = nodes[id].varmask; vm; vm &= vm - 1)
      key.push_back(visit(static_cast<unsigned>(sidx[std::countr_zero(vm)])));
    key.push_back('|');
    for (std::uint64_t d = st.dom; d; d &= d - 1) visit(static_cast<unsigned>(std::countr_zero(d)));
    for (int i = 0; i < next; ++i) {
      unsigned l = order[i];
      key.push_back(has(st.dom, l) ? static_cast<char>(lab[st.nxt[l]]) : static_cast<char>(-1));
    }
    return key;
  }

  bool eval(int id, const St& st) {
    ++stats.nodes;
    const unsigned sz = pc(st.dom);
    if (!has(may[id], sz)) return false;
    if (has(must[id], sz)) return true;
    if (req[id] & ~st.dom) return false;
    if (forb[id] & st.dom) return false;
    const Node& n = nodes[id];
    switch (n.kind) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::Emp: return st.dom == 0;
      case Kind::Eq: return sidx[n.x] == sidx[n.y];
      case Kind::PointsTo: {
        unsigned x = static_cast<unsigned>(sidx[n.x]);
        return has(st.dom, x) && st.nxt[x] == static_cast<unsigned>(sidx[n.y]);
      }
      case Kind::Ls:
        return list_seg(static_cast<unsigned>(sidx[n.x]), static_cast<unsigned>(sidx[n.y]), st);
      case Kind::Reach:
        return sidx[n.x] == sidx[n.y] ||
               walk_plus(static_cast<unsigned>(sidx[n.x]), static_cast<unsigned>(sidx[n.y]), st);
      case Kind::ReachPlus:
        return walk_plus(static_cast<unsigned>(sidx[n.x]), static_cast<unsigned>(sidx[n.y]), st);
      case Kind::Not:
        if (n.or_pat) {
          int a = n.or_a, b = n.or_b;
          if (nodes[b].cost < nodes[a].cost) std::swap(a, b);
          return eval(a, st) || eval(b, st);
        }
        return !eval(n.l, st);
      case Kind::And: {
        int a = n.l, b = n.r;
        if (nodes[b].cost < nodes[a].cost) std::swap(a, b);
        return eval(a, st) && eval(b, st);
      }
      case Kind::Star:
      case Kind::Wand: {
        if (n.alloc_pat) {
          if (!bounded_alloc_exact()) {
            if (policy.mode == WandPolicy::Mode::Forbid) throw WandForbidden();
            return true;
          }
          return has(st.dom, static_cast<unsigned>(sidx[n.x]));
        }
        if (n.kind == Kind::Wand && policy.mode == WandPolicy::Mode::Forbid) throw WandForbidden();
        std::string key = memo_key(id, st);
        auto it = memo.find(key);
        if (it != memo.end()) {
          ++stats.memo_hits;
          return it->second;
        }
        bool v = n.kind == Kind::Star ? eval_star(id, st) : eval_wand(id, st);
        if (memo.size() >= kMemoCap) memo.clear();
        memo.emplace(std::move(key), v);
        return v;
      }
    }
    return false;
  }

  bool eval_star(int id, const St& st) {
    const Node& n = nodes[id];
    int a = n.l, b = n.r;
    std::uint64_t D = st.dom;
    if (req[a] & req[b]) return false;
    std::uint64_t fin = (req[a] | forb[b]) & D;
    std::uint64_t fout = (req[b] | forb[a]) & D;
    if (fin & fout) return false;
    std::uint64_t free = D & ~fin & ~fout;
    std::array<unsigned, 64> fb{};
    unsigned nf = 0;
    for (std::uint64_t m = free; m; m &= m - 1) fb[nf++] = static_cast<unsigned>(std::countr_zero(m));
    if (nf > 40) throw std::length_error("star: heap too large to split");
    unsigned base = pc(fin), total = pc(D);
    bool a_first = nodes[a].cost <= nodes[b].cost;
    St s1 = st, s2 = st;
    for (unsigned k = 0; k <= nf; ++k) {
      unsigned n1 = base + k, n2 = total - n1;
      if (!has(may[a], n1) || !has(may[b], n2)) continue;
      if (has(must[a], n1) && has(must[b], n2)) return true;
      // k-subsets of the free cells, Gosper order
      std::uint64_t limit = nf == 64 ? 0 : (1ULL << nf);
      std::uint64_t c = k == 0 ? 0 : (1ULL << k) - 1;
      for (;;) {
        std::uint64_t part = 0;
        for (std::uint64_t m = c; m; m &= m - 1) part |= bit(fb[std::countr_zero(m)]);
        s1.dom = fin | part;
        s2.dom = D & ~s1.dom;
        bool ok = a_first ? (eval(a, s1) && eval(b, s2)) : (eval(b, s2) && eval(a, s1));
        if (ok) return true;
        if (k == 0) break;
        std::uint64_t t = c | (c - 1);
        c = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(c) + 1));
        if (c >= limit) break;
      }
    }
    return false;
  }

  struct WandGen {
    Impl* self;
    int A, B;
    std::uint64_t D;
    std::uint64_t allowed;  // admissible |h'|
    unsigned maxn;
    std::uint64_t rel;      // relevant locations, all usable as targets
    std::vector<unsigned> cells;  // relevant domain candidates
    std::uint64_t req;
    std::array<unsigned, 64> fresh{};
    unsigned nfresh = 0;
    St work;
    std::vector<unsigned> dom_rel;
    std::vector<unsigned> dom_fresh;
    bool counterexample = false;
    std::vector<int> dcs;  // downward-closed conjuncts of A

    // a downward-closed conjunct failing on the cells placed so far fails on
    // every completion
    bool partial_ok(std::uint64_t placed) {
      if (dcs.empty()) return true;
      St s = work;
      s.dom = placed;
      for (int c : dcs)
        if (!self->eval(c, s)) return false;
      return true;
    }

    std::uint64_t rel_mask(std::size_t upto) const {
      std::uint64_t m = 0;
      for (std::size_t i = 0; i < upto; ++i) m |= bit(dom_rel[i]);
      return m;
    }

    void leaf() {
      ++self->stats.extensions;
      std::uint64_t ext = 0;
      for (unsigned c : dom_rel) ext |= bit(c);
      for (unsigned c : dom_fresh) ext |= bit(c);
      St st_a = work;
      st_a.dom = ext;
      if (!self->eval(A, st_a)) return;
      St st_b = work;
      st_b.dom = D | ext;
      if (!self->eval(B, st_b)) counterexample = true;
    }

    // targets of the fresh domain cells, restricted growth from t
    void assign_fresh(std::size_t i, unsigned t) {
      if (counterexample) return;
      if (i == dom_fresh.size()) {
        leaf();
        return;
      }
      unsigned c = dom_fresh[i];
      std::uint64_t placed = rel_mask(dom_rel.size());
      for (std::size_t k = 0; k <= i; ++k) placed |= bit(dom_fresh[k]);
      for (std::uint64_t m = rel; m; m &= m - 1) {
        work.nxt[c] = static_cast<std::uint8_t>(std::countr_zero(m));
        if (partial_ok(placed)) assign_fresh(i + 1, t);
        if (counterexample) return;
      }
      for (unsigned j = 0; j <= t && j < nfresh; ++j) {
        work.nxt[c] = static_cast<std::uint8_t>(fresh[j]);
        if (partial_ok(placed)) assign_fresh(i + 1, j == t ? t + 1 : t);
        if (counterexample) return;
      }
    }

    // which fresh locations are allocated: a subset of the t introduced ones
    // plus some brand new ones
    void choose_fresh(unsigned j, unsigned t) {
      if (counterexample) return;
      unsigned n = static_cast<unsigned>(dom_rel.size() + dom_fresh.size());
      if (j == t) {
        for (unsigned extra = 0; t + extra <= nfresh && n + extra <= maxn; ++extra) {
          if (has(allowed, n + extra)) {
            for (unsigned e = 0; e < extra; ++e) dom_fresh.push_back(fresh[t + e]);
            assign_fresh(0, t + extra);
            dom_fresh.resize(dom_fresh.size() - extra);
            if (counterexample) return;
          }
        }
        return;
      }
      choose_fresh(j + 1, t);
      if (n + 1 <= maxn) {
        dom_fresh.push_back(fresh[j]);
        choose_fresh(j + 1, t);
        dom_fresh.pop_back();
      }
    }

    void assign_rel(std::size_t i, unsigned t) {
      if (counterexample) return;
      if (i == dom_rel.size()) {
        choose_fresh(0, t);
        return;
      }
      unsigned c = dom_rel[i];
      std::uint64_t placed = rel_mask(i + 1);
      for (std::uint64_t m = rel; m; m &= m - 1) {
        work.nxt[c] = static_cast<std::uint8_t>(std::countr_zero(m));
        if (partial_ok(placed)) assign_rel(i + 1, t);
        if (counterexample) return;
      }
      for (unsigned j = 0; j <= t && j < nfresh; ++j) {
        work.nxt[c] = static_cast<std::uint8_t>(fresh[j]);
        if (partial_ok(placed)) assign_rel(i + 1, j == t ? t + 1 : t);
        if (counterexample) return;
      }
    }

    void choose_rel(std::size_t i) {
      if (counterexample) return;
      if (dom_rel.size() > maxn) return;
      if (i == cells.size()) {
        assign_rel(0, 0);
        return;
      }
      unsigned c = cells[i];
      if (!has(req, c)) choose_rel(i + 1);
      dom_rel.push_back(c);
      choose_rel(i + 1);
      dom_rel.pop_back();
    }
  };

  // SL(*,-*) under a complete bound: a formula only sees the cells at its
  // variables (and whether they point to a variable) plus how many other
  // cells there are.  So other cells all go to fresh locations pointing to
  // one fresh target and only their number varies.
  bool eval_wand_counted(int A, int B, std::uint64_t D, std::uint64_t allowed, std::uint64_t rel,
                         std::uint64_t varmask, const St& st) {
    std::uint64_t vlocs = 0;
    for (std::uint64_t vm = varmask; vm; vm &= vm - 1)
      vlocs |= bit(static_cast<unsigned>(sidx[std::countr_zero(vm)]));
    std::uint64_t avail = vlocs & ~D & ~forb[A];
    if (req[A] & ~avail) return true;
    unsigned need = hi(allowed) + 1;
    std::vector<unsigned> fresh;
    for (std::uint64_t outside = ~rel; fresh.size() < need; outside &= outside - 1) {
      if (!outside) throw std::length_error("wand: location index space exhausted");
      fresh.push_back(static_cast<unsigned>(std::countr_zero(outside)));
    }
    std::vector<unsigned> targets;
    for (std::uint64_t m = vlocs; m; m &= m - 1) targets.push_back(static_cast<unsigned>(std::countr_zero(m)));
    targets.push_back(fresh[0]);
    std::uint64_t optional = avail & ~req[A];
    St work = st;
    // every subset of the optional variable cells, on top of the required ones
    for (std::uint64_t sub = optional;; sub = (sub - 1) & optional) {
      std::uint64_t cells = sub | req[A];
      std::vector<unsigned> vc;
      for (std::uint64_t m = cells; m; m &= m - 1) vc.push_back(static_cast<unsigned>(std::countr_zero(m)));
      unsigned nv = static_cast<unsigned>(vc.size());
      if (nv <= hi(allowed)) {
        std::vector<std::size_t> pick(vc.size(), 0);
        for (;;) {
          for (std::size_t i = 0; i < vc.size(); ++i) work.nxt[vc[i]] = static_cast<std::uint8_t>(targets[pick[i]]);
          std::uint64_t ext = cells;
          for (unsigned k = nv; k <= hi(allowed); ++k) {
            if (k > nv) {
              unsigned c = fresh[k - nv];  // fresh[0] stays the shared target
              work.nxt[c] = static_cast<std::uint8_t>(fresh[0]);
              ext |= bit(c);
            }
            if (!has(allowed, k)) continue;
            ++stats.extensions;
            St st_a = work;
            st_a.dom = ext;
            if (!eval(A, st_a)) continue;
            St st_b = work;
            st_b.dom = D | ext;
            if (!eval(B, st_b)) return false;
          }
          std::size_t i = 0;
          while (i < pick.size() && ++pick[i] == targets.size()) pick[i++] = 0;
          if (i == pick.size()) break;
        }
      }
      if (sub == 0) break;
    }
    return true;
  }

  // conjuncts of an And tree that are downward closed and worth testing early
  void collect_dc(int id, std::vector<int>& out) const {
    const Node& n = nodes[id];
    if (n.kind == Kind::And) {
      collect_dc(n.l, out);
      collect_dc(n.r, out);
      return;
    }
    if (dc[id] && !uc[id] && !n.alloc_pat) out.push_back(id);
  }

  bool eval_wand(int id, const St& st) {
    const Node& n = nodes[id];
    int A = n.l, B = n.r;
    std::uint64_t D = st.dom;
    if (req[A] & D) return true;
    unsigned bound = policy.cell_bound;
    if (dc[A] && nodes[B].kind == Kind::Not) {
      int U = nodes[B].l;
      if (nodes[U].wand_free && uc[U]) bound = std::min(bound, wit[U]);
    }
    unsigned dsz = pc(D);
    std::uint64_t allowed = 0;
    for (unsigned k = pc(req[A]); k <= bound && dsz + k <= 63; ++k)
      if (has(may[A], k) && !has(must[B], dsz + k)) allowed |= bit(k);
    if (!allowed) return true;

    std::uint64_t rel = D | ran_of(st);
    for (std::uint64_t vm = n.varmask; vm; vm &= vm - 1)
      rel |= bit(static_cast<unsigned>(sidx[std::countr_zero(vm)]));

    if (n.reach_free && policy.cell_bound >= 2 * n.size && policy.fresh_locations >= 2 * n.size)
      return eval_wand_counted(A, B, D, allowed, rel, n.varmask, st);

    WandGen g{this, A, B, D, allowed, hi(allowed), rel, {}, req[A], {}, 0, st, {}, {}, false, {}};
    if (req[A] & ~(rel & ~D)) return true;
    for (std::uint64_t m = rel & ~D & ~forb[A]; m; m &= m - 1)
      g.cells.push_back(static_cast<unsigned>(std::countr_zero(m)));
    std::uint64_t outside = ~rel;
    while (g.nfresh < policy.fresh_locations) {
      if (!outside) throw std::length_error("wand: location index space exhausted");
      g.fresh[g.nfresh++] = static_cast<unsigned>(std::countr_zero(outside));
      outside &= outside - 1;
    }
    collect_dc(A, g.dcs);
    g.choose_rel(0);
    return !g.counterexample;
  }

  // -------------------------------------------------------------- entry

  CheckResult run(const MemoryState& m, const Formula& f) {
    if (policy.mode == WandPolicy::Mode::Forbid && has_wand(f)) throw WandForbidden();
    if (max_var(f) > m.q)
      throw std::invalid_argument("formula uses x" + std::to_string(max_var(f)) +
                                  " but the state only defines " + std::to_string(m.q) +
                                  " variable(s)");
    int root = compile(f);
    std::set<Loc> rel = relevant_locations(m);
    if (rel.size() > 64) throw std::length_error("state has more than 64 relevant locations");
    if (m.heap.size() > 63) throw std::length_error("heap has more than 63 cells");
    std::unordered_map<Loc, int> idx;
    std::vector<Loc> locs(rel.begin(), rel.end());
    for (std::size_t i = 0; i < locs.size(); ++i) idx[locs[i]] = static_cast<int>(i);
    sidx.fill(0);
    for (int v = 1; v <= m.q && v <= kMaxVar; ++v) sidx[v] = idx[m.s(v)];
    St st;
    for (auto [l, v] : m.heap) {
      st.dom |= bit(static_cast<unsigned>(idx[l]));
      st.nxt[idx[l]] = static_cast<std::uint8_t>(idx[v]);
    }
    std::size_t N = nodes.size();
    may.resize(N);
    must.resize(N);
    req.resize(N);
    forb.resize(N);
    wit.resize(N);
    uc.resize(N);
    dc.resize(N);
    stamp.resize(N, 0);
    if (++cur_stamp == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      cur_stamp = 1;
    }
    analyse(root);
    CheckResult res;
    res.value = eval(root, st);
    res.complete = complete_for(f);
    return res;
  }

  bool complete_for(const Formula& f) const {
    if (!has_wand(f)) return true;
    if (policy.mode != WandPolicy::Mode::Bounded) return false;
    if (in_fragment(f, Fragment::SL_STAR_WAND)) {
      std::uint64_t b = 2 * size(f);
      return policy.cell_bound >= b && policy.fresh_locations >= b;
    }
    return false;
  }
};

Checker::Checker(WandPolicy policy) : impl_(std::make_unique<Impl>(policy)) {}
Checker::~Checker() = default;
Checker::Checker(Checker&&) noexcept = default;
Checker& Checker::operator=(Checker&&) noexcept = default;

CheckResult Checker::check(const MemoryState& m, const Formula& f) { return impl_->run(m, f); }
const WandPolicy& Checker::policy() const { return impl_->policy; }
const CheckStats& Checker::stats() const { return impl_->stats; }
void Checker::clear_cache() { impl_->memo.clear(); }

CheckResult check(const MemoryState& m, const Formula& f, const WandPolicy& policy) {
  Checker c(policy);
  return c.check(m, f);
}

bool check_exact(const MemoryState& m, const Formula& f) {
  if (has_wand(f)) throw WandForbidden();
  Checker c(WandPolicy::forbid());
  return c.check(m, f).value;
}

std::uint64_t sl_star_wand_bound(const Formula& f) {
  if (!in_fragment(f, Fragment::SL_STAR_WAND))
    throw std::invalid_argument("sl_star_wand_bound: formula is not in SL(*,-*)");
  return 2 * size(f);
}

}  // namespace slr
