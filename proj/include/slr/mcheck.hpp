#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>

#include "slr/formula.hpp"
#include "slr/memstate.hpp"

namespace slr {

struct WandPolicy {
  enum class Mode { Forbid, Bounded };
  Mode mode = Mode::Forbid;
  unsigned cell_bound = 0;
  unsigned fresh_locations = 1;

  static WandPolicy forbid() { return {}; }
  static WandPolicy bounded(unsigned cells, unsigned fresh) {
    return {Mode::Bounded, cells, fresh};
  }
};

struct CheckResult {
  bool value = false;
  // false when some magic wand was only explored up to the cell bound
  bool complete = true;
};

struct WandForbidden : std::invalid_argument {
  WandForbidden() : std::invalid_argument("formula contains -* but the wand policy forbids it") {}
};

struct CheckStats {
  std::uint64_t nodes = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t extensions = 0;
};

// Reusable model checker.  Evaluation results are cached across calls for the
// same policy, keyed on the state up to renaming of locations.
class Checker {
 public:
  explicit Checker(WandPolicy policy = WandPolicy::forbid());
  ~Checker();
  Checker(Checker&&) noexcept;
  Checker& operator=(Checker&&) noexcept;

  CheckResult check(const MemoryState& m, const Formula& f);
  const WandPolicy& policy() const;
  const CheckStats& stats() const;
  void clear_cache();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CheckResult check(const MemoryState& m, const Formula& f, const WandPolicy& policy);
bool check_exact(const MemoryState& m, const Formula& f);

// 2|f| for formulae of SL(*, -*); throws std::invalid_argument otherwise.
std::uint64_t sl_star_wand_bound(const Formula& f);

}  // namespace slr
