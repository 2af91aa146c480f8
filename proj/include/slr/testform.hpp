#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slr/formula.hpp"
#include "slr/memstate.hpp"
#include "slr/sgraph.hpp"

namespace slr {

struct TestAtom {
  enum class Kind : std::uint8_t { Eq, Alloc, PointsTo, Sees, SizeOthers };
  Kind kind = Kind::Eq;
  Term t;
  Term u;
  // Sees: sees(t,u) >= beta + 1.  SizeOthers: sizeothers >= beta.
  unsigned beta = 0;

  static TestAtom eq(Term t, Term u) { return {Kind::Eq, t, u, 0}; }
  static TestAtom alloc(Term t) { return {Kind::Alloc, t, {}, 0}; }
  static TestAtom pointsto(Term t, Term u) { return {Kind::PointsTo, t, u, 0}; }
  static TestAtom sees(Term t, Term u, unsigned beta) { return {Kind::Sees, t, u, beta}; }
  static TestAtom sizeothers(unsigned beta) { return {Kind::SizeOthers, {}, {}, beta}; }
  auto operator<=>(const TestAtom&) const = default;
};

std::string to_string(const TestAtom& a);

// Test(q, alpha) in a fixed order.
std::vector<TestAtom> test_atoms(int q, unsigned alpha);

bool eval_atom(const SupportGraph& g, const TestAtom& a);
bool eval_atom(const MemoryState& m, const TestAtom& a);

struct LiteralProfile {
  int q = 0;
  unsigned alpha = 0;
  std::vector<bool> bits;  // parallel to test_atoms(q, alpha)
  bool operator==(const LiteralProfile&) const = default;
};

LiteralProfile profile(const MemoryState& m, unsigned alpha);
LiteralProfile profile(const SupportGraph& g, unsigned alpha);
// satisfied atoms, one per line, sorted
std::string dump(const LiteralProfile& p);

struct EquivalenceMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

// Profile comparison, cross-checked against the A1-A5 map search; throws
// EquivalenceMismatch if the two disagree.
bool equivalent(const MemoryState& m1, const MemoryState& m2, unsigned alpha);
bool equivalent_by_profile(const MemoryState& m1, const MemoryState& m2, unsigned alpha);
// The map f : V1 -> V2 if it satisfies A1-A5.
std::optional<std::map<Loc, Loc>> graph_map(const SupportGraph& g1, const SupportGraph& g2,
                                            unsigned alpha);

// Boolean combination of test atoms.
struct TestExpr {
  enum class Op : std::uint8_t { True, False, Atom, Not, And, Or };
  Op op = Op::True;
  TestAtom atom;
  std::vector<TestExpr> kids;

  static TestExpr truth(bool b) { return {b ? Op::True : Op::False, {}, {}}; }
  static TestExpr of(TestAtom a) { return {Op::Atom, a, {}}; }
  static TestExpr lnot(TestExpr e) { return {Op::Not, {}, {std::move(e)}}; }
  static TestExpr all(std::vector<TestExpr> es) { return {Op::And, {}, std::move(es)}; }
  static TestExpr any(std::vector<TestExpr> es) { return {Op::Or, {}, std::move(es)}; }
};

bool eval(const SupportGraph& g, const TestExpr& e);
std::size_t expr_size(const TestExpr& e);
std::string to_string(const TestExpr& e);

struct EncodeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EncodeOptions {
  // Drop size>=beta disjuncts subsumed by others: components never exceed
  // what the sum needs and zero-size terms are left out of V.
  bool prune = false;
};

// emp, reach+(xi,xj) or size>=beta (as produced by size_geq) as a Boolean
// combination of Test(q, alpha).
TestExpr encode_atomic(const Formula& a, int q, unsigned alpha, EncodeOptions opt = {});

struct SplitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Given m1 ~ m2 at alpha1 + alpha2 and h_a + h_b = m1.heap, a split of m2.heap
// whose parts match (s1,h_a) at alpha1 and (s1,h_b) at alpha2.
std::pair<Heap, Heap> match_split(const MemoryState& m1, const MemoryState& m2, const Heap& h_a,
                                  const Heap& h_b, unsigned alpha1, unsigned alpha2);

// (q^2 + q)(n + 1) + n
std::uint64_t kappa(std::uint64_t q, std::uint64_t n);

// Small equivalent state at alpha with at most kappa(q, alpha) cells.
MemoryState shrink(const MemoryState& m, unsigned alpha);

}  // namespace slr
