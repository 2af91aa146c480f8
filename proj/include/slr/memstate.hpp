#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "slr/formula.hpp"

namespace slr {

using Loc = std::uint64_t;
using Heap = std::map<Loc, Loc>;

struct MemoryState {
  int q = 0;
  std::vector<Loc> store;  // store[i-1] = s(x_i)
  Heap heap;

  Loc s(VarId x) const { return store.at(static_cast<std::size_t>(x - 1)); }
  bool operator==(const MemoryState&) const = default;
};

MemoryState make_state(std::vector<Loc> store, Heap heap);

struct OverlapError : std::invalid_argument {
  Loc loc;
  explicit OverlapError(Loc l);
};

Heap compose(const Heap& h1, const Heap& h2);
std::optional<Loc> iterate(const Heap& h, Loc l, std::uint64_t i);

std::set<Loc> dom(const Heap& h);
std::set<Loc> ran(const Heap& h);
// Store range, heap domain and heap range.
std::set<Loc> relevant_locations(const MemoryState& m);

// Subheaps in increasing bitmask order over the sorted domain.
void for_each_subheap(const Heap& h, const std::function<void(const Heap&)>& fn);
std::vector<Heap> subheaps(const Heap& h);

// All h1 with dom(h1) in universe \ dom(h), ran(h1) in universe and at most
// max_cells cells.  Ordered by cell count, then by the sorted cell list.
void for_each_extension(const Heap& h, const std::set<Loc>& universe, std::size_t max_cells,
                        const std::function<void(const Heap&)>& fn);
std::vector<Heap> extensions(const Heap& h, const std::set<Loc>& universe, std::size_t max_cells);

// A bijection between the relevant locations (store restricted to X, dom, ran)
// of the two states that maps h1 onto h2 and s1(x) to s2(x) for x in X.
std::optional<std::map<Loc, Loc>> isomorphic_wrt(const MemoryState& m1, const MemoryState& m2,
                                                 const std::set<VarId>& X);

std::string to_json(const MemoryState& m, int indent = -1);
MemoryState state_from_json(const std::string& text);
MemoryState load_state(const std::string& path);
void save_state(const MemoryState& m, const std::string& path);
std::string show(const MemoryState& m);

}  // namespace slr
