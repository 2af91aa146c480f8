#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "slr/formula.hpp"
#include "slr/mcheck.hpp"
#include "slr/memstate.hpp"

namespace slr {

struct SatResult {
  enum class Status { Sat, Unsat, Unknown };
  Status status = Status::Unknown;
  std::optional<MemoryState> model;
  std::uint64_t explored = 0;
  // cell bound the search was entitled to, kappa(q, .)
  std::uint64_t bound = 0;
};

std::string to_string(SatResult::Status s);

struct FragmentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exact truth for formulae without -*, evaluating * by splitting groups of
// support-graph cells rather than enumerating all subheaps.
bool check_abstract(const MemoryState& m, const Formula& f);

SatResult sat_reachplus(const Formula& f);
// x |-> y and ls rewritten into SL(*, reach+) as for Bool(SHF).
Formula shf_rewrite(const Formula& f);
SatResult sat_bool_shf(const Formula& f);
SatResult sat_boolcomb(const Formula& f);

// Keeps the cells at store locations plus `others` further cells redirected to
// an unused location.  An SL(*,-*) formula of size at most `others` has the
// same truth value on both states.
MemoryState wand_view(const MemoryState& m, std::size_t others);

enum class SolverChoice { Auto, ReachPlus, BoolShf, BoolComb };
SatResult solve(const Formula& f, SolverChoice how = SolverChoice::Auto);

struct Entailment {
  bool holds = false;
  std::optional<MemoryState> counter_model;
};
Entailment entails(const Formula& f, const Formula& g);

// Reference oracle: every canonical state within the caps, checked with
// mcheck.  Reports Unsat only when the caps reach kappa(q,|f|) cells and
// 2 kappa + q locations for a -*-free formula, Unknown otherwise.
SatResult brute_sat(const Formula& f, unsigned max_cells, unsigned max_locs, const WandPolicy& policy);

}  // namespace slr
