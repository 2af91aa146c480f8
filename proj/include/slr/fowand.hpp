#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slr/formula.hpp"
#include "slr/mcheck.hpp"
#include "slr/memstate.hpp"

namespace slr {

// First-order separation logic with -* only: x = y, x ~> y, not, /\, -*, forall.
enum class FoKind { Eq, PointsTo, Not, And, Wand, Forall };

struct FoNode;
using FoFormula = std::shared_ptr<const FoNode>;

struct FoNode {
  FoKind kind;
  VarId x = 0;  // atoms; bound variable for Forall
  VarId y = 0;
  FoFormula l;  // body for Not and Forall
  FoFormula r;
};

FoFormula fo_eq(VarId x, VarId y);
FoFormula fo_pointsto(VarId x, VarId y);
FoFormula fo_not(FoFormula f);
FoFormula fo_and(FoFormula a, FoFormula b);
FoFormula fo_or(FoFormula a, FoFormula b);
FoFormula fo_implies(FoFormula a, FoFormula b);
FoFormula fo_wand(FoFormula a, FoFormula b);
FoFormula fo_forall(VarId x, FoFormula body);

std::set<VarId> fo_free_vars(const FoFormula& f);
// Every variable occurring, bound or free.
VarId fo_max_var(const FoFormula& f);
bool fo_has_wand(const FoFormula& f);
std::size_t fo_size(const FoFormula& f);

// Formula grammar restricted to =, !=, ~>, not, /\, \/, =>, <=>, -*, plus
// `forall xi . body` whose body extends as far right as possible.
FoFormula parse_fo(std::string_view text);
std::string print(const FoFormula& f);

struct CaptureError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Source variables x1..xq; the target uses x1..x2q with bar(xi) = x(i+q).
struct EncodingContext {
  int q = 1;
  std::set<VarId> Z;  // free variables currently encoded, subset of 1..q
};

VarId bar(VarId x, int q);
// x1..x2q.
std::vector<VarId> translation_vars(int q);

// T(psi, X) with Safe over X, n(x) = n(y) as nexteq and n(x) ~> n(y) as
// nextpt with bar(x) as auxiliary.  Throws CaptureError when a variable is
// quantified twice or a quantified variable is in ctx.Z, invalid_argument when
// psi has a free variable outside ctx.Z or a variable above q.
Formula translate(const FoFormula& psi, const EncodingContext& ctx);
// q defaults to the largest variable index of psi.
Formula t_sat(const FoFormula& psi, int q = 0);
Formula t_val(const FoFormula& psi, int q = 0);

// (s2, h2) with s2(xi) = targets[i-1] for i in 1..2q and h2 = h1 plus
// targets[z-1] |-> s1(z) for z in Z.  m1 must define exactly q variables.
MemoryState encode_state(const MemoryState& m1, const std::vector<Loc>& targets, const std::set<VarId>& Z);
// The 2q smallest naturals above every relevant location of m1.
std::vector<Loc> canonical_targets(const MemoryState& m1, int q);

// forall ranges over the relevant locations of the current state plus `fresh`
// locations outside them.  -* is enumerated with cell_bound new cells over the
// same kind of universe (policy.fresh_locations new locations); quantifier-free
// parts go to mcheck under the same policy.
bool check_fo(const MemoryState& m, const FoFormula& psi, unsigned fresh, const WandPolicy& policy);

}  // namespace slr
