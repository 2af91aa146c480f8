#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slr/memstate.hpp"

namespace slr {

// x_i, or the meet-point m(x_i, x_j).
struct Term {
  enum class Kind : std::uint8_t { Var, Meet };
  Kind kind = Kind::Var;
  VarId i = 1;
  VarId j = 0;

  static Term var(VarId i) { return {Kind::Var, i, 0}; }
  static Term meet(VarId i, VarId j) { return {Kind::Meet, i, j}; }
  auto operator<=>(const Term&) const = default;
};

std::string to_string(const Term& t);

// Variables x1..xq first, then m(xi,xj) in row-major order; q^2 + q terms.
std::vector<Term> all_terms(int q);
// Position of t in all_terms(q).
std::size_t term_index(const Term& t, int q);

std::optional<Loc> meet_point(const MemoryState& m, VarId i, VarId j);
std::optional<Loc> term_value(const MemoryState& m, const Term& t);

// Which of the three meet-point shapes (1: no variable on a loop reachable
// from the meet point, 2: on a loop with m(i,j) = m(j,i), 3: on a loop with
// m(i,j) != m(j,i)).  Absent when the meet point is undefined.
std::optional<int> meet_shape(const MemoryState& m, VarId i, VarId j);

struct SupportGraph {
  int q = 0;
  std::set<Loc> V;
  std::map<Loc, Loc> E;  // functional
  std::set<Loc> rho;
  std::map<Loc, std::vector<Term>> labels;  // sorted
  // keyed by edge; cells listed in path order
  std::map<std::pair<Loc, Loc>, std::vector<Loc>> btw;
  std::set<Loc> rem;
  // value of every term of all_terms(q), absent if undefined
  std::vector<std::optional<Loc>> value;

  std::size_t btw_size(Loc l) const;  // |btw(l, E(l))|, l must have an edge
};

SupportGraph build(const MemoryState& m);
std::string dump(const SupportGraph& g);

}  // namespace slr
