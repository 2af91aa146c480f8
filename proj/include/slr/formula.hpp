#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace slr {

// Index i of the program variable x_i, always >= 1.
using VarId = int;

enum class Kind : std::uint8_t {
  True,
  False,
  Emp,
  Eq,        // x = y
  PointsTo,  // x ~> y, non-precise
  Ls,        // precise acyclic list segment
  Reach,     // path of length >= 0
  ReachPlus, // path of length >= 1
  Not,
  And,
  Star,
  Wand,
};

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Kind kind;
  VarId x = 0;
  VarId y = 0;
  Formula l;
  Formula r;
  std::size_t hash = 0;
  std::uint64_t size = 1;   // node count of the tree
  std::uint64_t varmask = 0;
  std::uint32_t kinds = 0;  // bit per Kind occurring below
  unsigned msz = 1;
  VarId maxvar = 0;
};

constexpr VarId kMaxVar = 63;

bool is_atom(Kind k);
bool is_binary_atom(Kind k);

Formula mk_true();
Formula mk_false();
Formula emp();
Formula eq(VarId x, VarId y);
Formula pointsto(VarId x, VarId y);
Formula ls(VarId x, VarId y);
Formula reach(VarId x, VarId y);
Formula reachplus(VarId x, VarId y);
Formula lnot(Formula f);
Formula land(Formula a, Formula b);
Formula star(Formula a, Formula b);
Formula wand(Formula a, Formula b);
Formula atom(Kind k, VarId x, VarId y);

// Sugar; never produces a dedicated node.
Formula lor(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula neq(VarId x, VarId y);
Formula land_all(const std::vector<Formula>& fs);  // true when empty
Formula lor_all(const std::vector<Formula>& fs);   // false when empty

// Recognises the shape produced by lor, i.e. not(not a /\ not b).
std::optional<std::pair<Formula, Formula>> match_or(const Formula& f);

bool same(const Formula& a, const Formula& b);
std::uint64_t size(const Formula& f);
unsigned msize(const Formula& f);
VarId max_var(const Formula& f);
std::set<VarId> vars(const Formula& f);
bool has_wand(const Formula& f);
bool has_star(const Formula& f);
bool has_kind(const Formula& f, Kind k);

struct ParseError : std::runtime_error {
  std::size_t pos;
  ParseError(const std::string& msg, std::size_t p);
};

Formula parse(std::string_view text);
std::string print(const Formula& f);

// Macro catalogue.  Arguments are variables, naturals or formulae.
struct Var {
  VarId i;
};
using MacroArg = std::variant<Var, long, Formula>;

struct MacroError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Formula expand_macro(std::string_view name, const std::vector<MacroArg>& args);

Formula size_geq(long beta);
Formula size_leq(long beta);
Formula size_eq(long beta);
Formula septraction(Formula a, Formula b);
Formula alloc(VarId x);
Formula mapsto(VarId x, VarId y);
Formula bracket(Formula f, long gamma);
Formula reach_eq(VarId x, VarId y, long gamma);
Formula reach_leq(VarId x, VarId y, long gamma);
// alloc^{-1}_y(x): s(x) has a predecessor, with y as auxiliary variable.
Formula alloc_inv(VarId x, VarId y);
// x ~>^2_y x: x reaches itself in exactly two steps.
Formula loop2(VarId x, VarId y);
// Same with the biconditional head x ~> y <=> y ~> x; wrong when y ~> x but
// not x ~> y (kept for the regression test).
Formula loop2_literal(VarId x, VarId y);
// n(x) = n(y).
Formula next_eq(VarId x, VarId y);
// n(x) ~> n(y) with auxiliary z.
Formula next_pointsto(VarId x, VarId y, VarId z);
// Safe over xs, where xs[i] is paired with xs[i + xs.size()/2].
Formula safe(const std::vector<VarId>& xs);

// Matches exactly the expansion of mapsto(x, y).
std::optional<std::pair<VarId, VarId>> match_mapsto(const Formula& f);
// Matches exactly the expansion of alloc(x).
std::optional<VarId> match_alloc(const Formula& f);

enum class ReachTarget { Ls, Reach, ReachPlus };
Formula rewrite_reach(const Formula& f, ReachTarget target);

enum class Fragment {
  SL_STAR,
  SL_STAR_WAND,
  SL_STAR_REACHPLUS,
  SL_STAR_WAND_LS,
  BOOL_SHF,
  BOOLCOMB,
  NONE,
};

std::set<Fragment> classify(const Formula& f);
bool in_fragment(const Formula& f, Fragment fr);
std::string to_string(Fragment fr);

// Simultaneous renaming of variables; vars outside the map are kept.
Formula rename(const Formula& f, const std::vector<std::pair<VarId, VarId>>& map);

}  // namespace slr
