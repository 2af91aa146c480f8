#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "slr/mcheck.hpp"
#include "slr/testform.hpp"

using namespace slr;

namespace {

MemoryState st(std::vector<Loc> s, Heap h) { return make_state(std::move(s), std::move(h)); }

// the four discriminating states, xi = x1, xj = x2, xk = x3
MemoryState disc(int which) {
  switch (which) {
    case 1: return st({1, 3, 5}, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 1}});
    case 2: return st({1, 3, 5}, {{2, 1}, {3, 2}, {4, 3}, {5, 4}, {6, 5}, {1, 6}});
    case 3: return st({1, 2, 5}, {{1, 3}, {2, 4}, {3, 4}, {4, 5}, {5, 3}});
    default: return st({1, 2, 5}, {{1, 3}, {2, 4}, {3, 5}, {5, 4}, {4, 3}});
  }
}

MemoryState chain(std::size_t n) {
  Heap h;
  for (Loc l = 0; l <= n; ++l) h[l] = l + 1;
  return st({0, static_cast<Loc>(n + 1)}, h);
}

MemoryState random_state(std::mt19937_64& rng, int q, unsigned max_cells, unsigned nlocs) {
  auto loc = [&] { return std::uniform_int_distribution<Loc>(0, nlocs - 1)(rng); };
  std::vector<Loc> s;
  for (int i = 0; i < q; ++i) s.push_back(loc());
  Heap h;
  unsigned n = std::uniform_int_distribution<unsigned>(0, max_cells)(rng);
  for (unsigned k = 0; k < n; ++k) h[loc()] = loc();
  return st(s, h);
}

// Lengthens a btw path or adds a stray cell, then renames locations.
MemoryState stretch(std::mt19937_64& rng, const MemoryState& m) {
  SupportGraph g = build(m);
  std::set<Loc> rel = relevant_locations(m);
  Loc fresh = rel.empty() ? 0 : *rel.rbegin() + 1;
  Heap h = m.heap;
  std::vector<std::vector<Loc>> paths;
  for (auto& [e, cells] : g.btw)
    if (!cells.empty()) paths.push_back(cells);
  int how = std::uniform_int_distribution<int>(0, 2)(rng);
  if (how == 0 && !paths.empty()) {
    auto& p = paths[std::uniform_int_distribution<std::size_t>(0, paths.size() - 1)(rng)];
    Loc c = p[std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(rng)];
    h[fresh] = h.at(c);
    h[c] = fresh;
  } else if (how == 1) {
    h[fresh] = std::uniform_int_distribution<Loc>(0, fresh)(rng);
  }
  // reverse the location order
  Loc top = fresh + 1;
  auto r = [&](Loc l) { return top - l; };
  std::vector<Loc> s;
  for (Loc l : m.store) s.push_back(r(l));
  Heap out;
  for (auto& [l, v] : h) out[r(l)] = r(v);
  return st(s, out);
}

}  // namespace

TEST_CASE("discriminating state atoms") {
  CHECK(eval_atom(disc(1), TestAtom::sees(Term::var(1), Term::var(2), 1)));
  CHECK_FALSE(eval_atom(disc(2), TestAtom::sees(Term::var(1), Term::var(2), 1)));
  TestAtom a = TestAtom::pointsto(Term::meet(1, 2), Term::meet(2, 1));
  CHECK(eval_atom(disc(3), a));
  CHECK_FALSE(eval_atom(disc(4), a));
  CHECK(eval_atom(st({1}, {{5, 6}}), TestAtom::sizeothers(1)));
  CHECK(to_string(TestAtom::sees(Term::var(1), Term::meet(1, 2), 2)) == "sees(x1,m(x1,x2)) >= 3");
}

TEST_CASE("test atom count") {
  // (q^2+q)^2 eq, (q^2+q) alloc, (q^2+q)^2 pto, alpha (q^2+q)^2 sees, alpha sizeothers
  for (int q = 1; q <= 3; ++q)
    for (unsigned a = 1; a <= 3; ++a) {
      std::size_t t = static_cast<std::size_t>(q * q + q);
      CHECK(test_atoms(q, a).size() == (2 + a) * t * t + t + a);
    }
}

TEST_CASE("profiles") {
  // m(x1,x1) = s(x1) holds on the empty heap, so four equalities
  CHECK(dump(profile(st({1}, {}), 1)) ==
        "m(x1,x1) = m(x1,x1)\n"
        "m(x1,x1) = x1\n"
        "x1 = m(x1,x1)\n"
        "x1 = x1\n");
  CHECK(profile(st({1, 2}, {{1, 2}, {2, 9}}), 2) == profile(st({5, 3}, {{5, 3}, {3, 0}}), 2));
  CHECK(profile(disc(1), 2) != profile(disc(2), 2));
  CHECK_THROWS(profile(st({1}, {}), 0));
}

TEST_CASE("equivalence examples") {
  for (int k = 1; k <= 4; ++k) CHECK(equivalent(disc(k), disc(k), 2));
  CHECK_FALSE(equivalent(disc(3), disc(4), 1));
  Heap h5, h7;
  for (Loc l = 10; l < 15; ++l) h5[l] = 0;
  for (Loc l = 10; l < 17; ++l) h7[l] = 0;
  CHECK(equivalent(st({1}, h5), st({1}, h7), 3));
  CHECK_FALSE(equivalent(st({1}, h5), st({1}, h7), 6));
}

TEST_CASE("profile and support-graph map agree on random pairs") {
  std::mt19937_64 rng(7);
  std::size_t same = 0;
  for (int n = 0; n < 5000; ++n) {
    MemoryState a = random_state(rng, 2, 5, 6);
    MemoryState b = n % 2 ? stretch(rng, a) : random_state(rng, 2, 5, 6);
    unsigned alpha = 1 + static_cast<unsigned>(n % 3);
    bool e = false;
    REQUIRE_NOTHROW(e = equivalent(a, b, alpha));
    same += e;
  }
  CHECK(same > 500);
}

TEST_CASE("encode_atomic shapes") {
  CHECK(to_string(encode_atomic(emp(), 1, 1)) == "(not sizeothers >= 1 /\\ not alloc(x1))");
  TestExpr r = encode_atomic(reachplus(1, 1), 1, 1);
  // chains x1 -> x1 and x1 -> m(x1,x1) -> x1
  CHECK(r.op == TestExpr::Op::Or);
  CHECK(r.kids.size() == 2);
  CHECK_THROWS_AS(encode_atomic(size_geq(3), 1, 2), EncodeError);
  CHECK_THROWS_AS(encode_atomic(ls(1, 2), 2, 1), EncodeError);
  CHECK(expr_size(encode_atomic(size_geq(2), 2, 2, {true})) < expr_size(encode_atomic(size_geq(2), 2, 2)));
}

TEST_CASE("encode_atomic agrees with the checker") {
  struct Case {
    int q;
    unsigned alpha, cells;
    bool prune;
  };
  for (Case c : {Case{1, 1, 4, false}, Case{1, 2, 4, false}, Case{1, 3, 4, false}, Case{2, 1, 3, false},
                 Case{2, 1, 4, true}, Case{2, 2, 4, true}, Case{2, 3, 4, true}}) {
    std::vector<Formula> atoms{emp()};
    for (VarId i = 1; i <= c.q; ++i)
      for (VarId j = 1; j <= c.q; ++j) atoms.push_back(reachplus(i, j));
    for (unsigned b = 1; b <= c.alpha; ++b) atoms.push_back(size_geq(b));
    std::vector<TestExpr> enc;
    for (auto& a : atoms) enc.push_back(encode_atomic(a, c.q, c.alpha, {c.prune}));
    std::size_t bad = 0;
    oracle::for_each_state_canonical(c.q, c.cells, 5, [&](const MemoryState& m) {
      SupportGraph g = build(m);
      for (std::size_t k = 0; k < atoms.size(); ++k)
        if (eval(g, enc[k]) != check_exact(m, atoms[k])) ++bad;
    });
    CHECK_MESSAGE(bad == 0, "q=" << c.q << " alpha=" << c.alpha << " prune=" << c.prune);
  }
}

TEST_CASE("match_split") {
  MemoryState m = disc(3);
  auto [a, b] = match_split(m, m, m.heap, {}, 1, 1);
  CHECK(a == m.heap);
  CHECK(b.empty());
  Heap ha{{1, 3}, {3, 4}}, hb{{2, 4}, {4, 5}, {5, 3}};
  auto [a2, b2] = match_split(m, m, ha, hb, 2, 1);
  CHECK(equivalent(make_state(m.store, ha), make_state(m.store, a2), 2));
  CHECK(equivalent(make_state(m.store, hb), make_state(m.store, b2), 1));

  // chains of 3 and 5 intermediate cells, cut in the middle
  MemoryState c3 = chain(3), c5 = chain(5);
  REQUIRE(equivalent(c3, c5, 2));
  Heap cut_a{{0, 1}, {1, 2}}, cut_b{{2, 3}, {3, 4}};
  auto [x, y] = match_split(c3, c5, cut_a, cut_b, 1, 1);
  CHECK(equivalent(make_state(c3.store, cut_a), make_state(c5.store, x), 1));
  CHECK(equivalent(make_state(c3.store, cut_b), make_state(c5.store, y), 1));
  CHECK(compose(x, y) == c5.heap);

  CHECK_THROWS_AS(match_split(c3, disc(1), cut_a, cut_b, 1, 1), SplitError);
  CHECK_THROWS_AS(match_split(c3, c5, cut_a, {}, 1, 1), SplitError);
}

TEST_CASE("match_split on generated instances") {
  std::mt19937_64 rng(11);
  std::size_t done = 0;
  for (int n = 0; done < 2000 && n < 200000; ++n) {
    int q = 1 + n % 2;
    MemoryState m1 = random_state(rng, q, 5, 6);
    unsigned a1 = 1 + static_cast<unsigned>(rng() % 3), a2 = 1 + static_cast<unsigned>(rng() % 3);
    MemoryState m2 = n % 3 == 0 ? shrink(m1, a1 + a2) : stretch(rng, m1);
    if (n % 3 == 1) m2 = stretch(rng, m2);
    if (!equivalent(m1, m2, a1 + a2)) continue;
    Heap ha, hb;
    for (auto& [l, v] : m1.heap) (rng() % 2 ? ha : hb)[l] = v;
    auto [x, y] = match_split(m1, m2, ha, hb, a1, a2);
    CHECK(compose(x, y) == m2.heap);
    CHECK(equivalent(make_state(m1.store, ha), make_state(m2.store, x), a1));
    CHECK(equivalent(make_state(m1.store, hb), make_state(m2.store, y), a2));
    ++done;
  }
  CHECK(done == 2000);
}

TEST_CASE("shrink") {
  CHECK(kappa(2, 3) == 27);
  MemoryState c = chain(99);  // 100 cells
  REQUIRE(c.heap.size() == 100);
  MemoryState s = shrink(c, 2);
  CHECK(equivalent(c, s, 2));
  CHECK(s.heap.size() <= 3);
  CHECK(s.heap.size() <= kappa(2, 2));

  MemoryState small = st({1, 2}, {{1, 2}});
  CHECK(equivalent(small, shrink(small, 2), 2));
  CHECK(shrink(small, 2).heap.size() <= small.heap.size());

  std::mt19937_64 rng(3);
  for (int n = 0; n < 3000; ++n) {
    int q = 1 + n % 3;
    MemoryState m = random_state(rng, q, 12, 14);
    unsigned alpha = 1 + static_cast<unsigned>(n % 4);
    MemoryState r = shrink(m, alpha);
    CHECK(equivalent(m, r, alpha));
    CHECK(r.heap.size() <= kappa(static_cast<std::uint64_t>(q), alpha));
    CHECK(r.heap.size() <= m.heap.size());
  }
}

TEST_CASE("shrink preserves wand-free formulae") {
  std::mt19937_64 rng(5);
  oracle::Gen gen(17, 2);
  for (int n = 0; n < 300; ++n) {
    Formula f = gen.sized(1 + n % 6);
    unsigned alpha = std::max(1u, msize(rewrite_reach(f, ReachTarget::ReachPlus)));
    for (int k = 0; k < 10; ++k) {
      MemoryState m = random_state(rng, 2, 7, 9);
      CHECK_MESSAGE(check_exact(m, f) == check_exact(shrink(m, alpha), f), print(f) << " on " << show(m));
    }
  }
}

TEST_CASE("equivalent states agree on formulae of small msize") {
  // group every state by profile; each group must agree on every formula
  for (int q = 1; q <= 2; ++q) {
    std::vector<MemoryState> states;
    oracle::for_each_state_canonical(q, 3, 4, [&](const MemoryState& m) { states.push_back(m); });
    std::map<unsigned, std::vector<LiteralProfile>> profiles;
    oracle::Gen gen(100 + static_cast<std::uint64_t>(q), q);
    std::size_t checked = 0;
    for (int n = 0; n < 120; ++n) {
      Formula f = gen.sized(1 + n % 6);
      unsigned alpha = std::max(1u, msize(rewrite_reach(f, ReachTarget::ReachPlus)));
      auto& ps = profiles[alpha];
      if (ps.empty())
        for (auto& m : states) ps.push_back(profile(m, alpha));
      std::map<std::vector<bool>, bool> seen;
      for (std::size_t k = 0; k < states.size(); ++k) {
        bool v = check_exact(states[k], f);
        auto [it, fresh] = seen.emplace(ps[k].bits, v);
        if (!fresh) CHECK_MESSAGE(it->second == v, print(f) << " on " << show(states[k]));
        ++checked;
      }
    }
    CHECK(checked > 0);
  }
}
