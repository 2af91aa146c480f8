#include "slr/memstate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace slr {

MemoryState make_state(std::vector<Loc> store, Heap heap) {
  MemoryState m;
  m.q = static_cast<int>(store.size());
  m.store = std::move(store);
  m.heap = std::move(heap);
  return m;
}

OverlapError::OverlapError(Loc l)
    : std::invalid_argument("heaps overlap at location " + std::to_string(l)), loc(l) {}

Heap compose(const Heap& h1, const Heap& h2) {
  Heap out = h1;
  for (auto [l, v] : h2) {
    if (!out.emplace(l, v).second) throw OverlapError(l);
  }
  return out;
}

std::optional<Loc> iterate(const Heap& h, Loc l, std::uint64_t i) {
  Loc cur = l;
  for (std::uint64_t k = 0; k < i; ++k) {
    auto it = h.find(cur);
    if (it == h.end()) return std::nullopt;
    cur = it->second;
    // Past |dom(h)| steps the walk is periodic; skip whole periods.
    if (k + 1 > h.size() && k + 1 < i) {
      std::uint64_t period = 0;
      Loc probe = cur;
      do {
        probe = h.at(probe);
        ++period;
      } while (probe != cur);
      std::uint64_t left = (i - k - 1) % period;
      for (std::uint64_t j = 0; j < left; ++j) cur = h.at(cur);
      return cur;
    }
  }
  return cur;
}

std::set<Loc> dom(const Heap& h) {
  std::set<Loc> out;
  for (auto& [l, v] : h) out.insert(l);
  return out;
}

std::set<Loc> ran(const Heap& h) {
  std::set<Loc> out;
  for (auto& [l, v] : h) out.insert(v);
  return out;
}

std::set<Loc> relevant_locations(const MemoryState& m) {
  std::set<Loc> out(m.store.begin(), m.store.end());
  for (auto& [l, v] : m.heap) {
    out.insert(l);
    out.insert(v);
  }
  return out;
}

void for_each_subheap(const Heap& h, const std::function<void(const Heap&)>& fn) {
  std::vector<std::pair<Loc, Loc>> cells(h.begin(), h.end());
  if (cells.size() >= 63) throw std::length_error("subheaps: heap too large");
  std::uint64_t n = 1ULL << cells.size();
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Heap sub;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (mask & (1ULL << i)) sub.emplace_hint(sub.end(), cells[i]);
    fn(sub);
  }
}

std::vector<Heap> subheaps(const Heap& h) {
  std::vector<Heap> out;
  for_each_subheap(h, [&](const Heap& s) { out.push_back(s); });
  return out;
}

void for_each_extension(const Heap& h, const std::set<Loc>& universe, std::size_t max_cells,
                        const std::function<void(const Heap&)>& fn) {
  std::vector<Loc> free;
  for (Loc l : universe)
    if (!h.count(l)) free.push_back(l);
  std::vector<Loc> targets(universe.begin(), universe.end());
  std::size_t cap = std::min(max_cells, free.size());

  Heap cur;
  std::vector<std::size_t> pick;
  // choose k domain cells (as an increasing index list), then every target tuple
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t k) {
    if (pick.size() == k) {
      std::function<void(std::size_t)> assign = [&](std::size_t i) {
        if (i == k) {
          fn(cur);
          return;
        }
        for (Loc t : targets) {
          cur[free[pick[i]]] = t;
          assign(i + 1);
        }
        cur.erase(free[pick[i]]);
      };
      assign(0);
      return;
    }
    for (std::size_t i = start; i + (k - pick.size()) <= free.size(); ++i) {
      pick.push_back(i);
      choose(i + 1, k);
      pick.pop_back();
    }
  };
  for (std::size_t k = 0; k <= cap; ++k) {
    if (k > 0 && targets.empty()) break;
    choose(0, k);
  }
}

std::vector<Heap> extensions(const Heap& h, const std::set<Loc>& universe, std::size_t max_cells) {
  std::vector<Heap> out;
  for_each_extension(h, universe, max_cells, [&](const Heap& e) { out.push_back(e); });
  return out;
}

namespace {

struct IsoSearch {
  const Heap& h1;
  const Heap& h2;
  std::vector<Loc> todo;  // relevant locations of the first state
  std::set<Loc> rel2;
  std::map<Loc, Loc> f, g;

  bool assign(Loc a, Loc b, std::vector<Loc>& trail) {
    auto fi = f.find(a);
    if (fi != f.end()) return fi->second == b;
    if (g.count(b)) return false;
    if (!rel2.count(b)) return false;
    f[a] = b;
    g[b] = a;
    trail.push_back(a);
    auto i1 = h1.find(a);
    auto i2 = h2.find(b);
    if ((i1 == h1.end()) != (i2 == h2.end())) return false;
    if (i1 != h1.end()) return assign(i1->second, i2->second, trail);
    return true;
  }

  void undo(std::vector<Loc>& trail) {
    for (Loc a : trail) {
      g.erase(f[a]);
      f.erase(a);
    }
    trail.clear();
  }

  bool search(std::size_t i) {
    while (i < todo.size() && f.count(todo[i])) ++i;
    if (i == todo.size()) return true;
    Loc a = todo[i];
    for (Loc b : rel2) {
      if (g.count(b)) continue;
      std::vector<Loc> trail;
      if (assign(a, b, trail) && search(i + 1)) return true;
      undo(trail);
    }
    return false;
  }
};

}  // namespace

std::optional<std::map<Loc, Loc>> isomorphic_wrt(const MemoryState& m1, const MemoryState& m2,
                                                 const std::set<VarId>& X) {
  if (m1.heap.size() != m2.heap.size()) return std::nullopt;
  auto rel = [&X](const MemoryState& m) {
    std::set<Loc> out;
    for (VarId x : X)
      if (x >= 1 && x <= m.q) out.insert(m.s(x));
    for (auto& [l, v] : m.heap) {
      out.insert(l);
      out.insert(v);
    }
    return out;
  };
  std::set<Loc> r1 = rel(m1), r2 = rel(m2);
  if (r1.size() != r2.size()) return std::nullopt;
  IsoSearch s{m1.heap, m2.heap, {}, r2, {}, {}};
  std::vector<Loc> trail;
  for (VarId x : X) {
    if (x < 1 || x > m1.q || x > m2.q) continue;
    if (!s.assign(m1.s(x), m2.s(x), trail)) return std::nullopt;
  }
  // allocated cells first so that propagation does most of the work
  for (auto& [l, v] : m1.heap) s.todo.push_back(l);
  for (Loc l : r1)
    if (!m1.heap.count(l)) s.todo.push_back(l);
  if (!s.search(0)) return std::nullopt;
  return s.f;
}

using nlohmann::json;

std::string to_json(const MemoryState& m, int indent) {
  json j;
  j["q"] = m.q;
  json st = json::object();
  for (int i = 1; i <= m.q; ++i) st["x" + std::to_string(i)] = m.s(i);
  j["store"] = st;
  json hp = json::object();
  for (auto& [l, v] : m.heap) hp[std::to_string(l)] = v;
  j["heap"] = hp;
  return j.dump(indent);
}

namespace {

Loc parse_loc(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw std::invalid_argument("bad location '" + s + "'");
  return std::stoull(s);
}

Loc loc_value(const json& v) {
  if (v.is_number_unsigned()) return v.get<Loc>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<Loc>(v.get<long long>());
  if (v.is_string()) return parse_loc(v.get<std::string>());
  throw std::invalid_argument("location must be a natural number");
}

}  // namespace

MemoryState state_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("state file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("store"))
    throw std::invalid_argument("state file: expected an object with \"store\"");
  MemoryState m;
  const json& st = j["store"];
  int maxv = 0;
  std::map<int, Loc> vals;
  for (auto it = st.begin(); it != st.end(); ++it) {
    const std::string& k = it.key();
    if (k.size() < 2 || k[0] != 'x') throw std::invalid_argument("state file: bad variable " + k);
    int v = static_cast<int>(parse_loc(k.substr(1)));
    if (v < 1) throw std::invalid_argument("state file: bad variable " + k);
    vals[v] = loc_value(it.value());
    maxv = std::max(maxv, v);
  }
  m.q = j.contains("q") ? j["q"].get<int>() : maxv;
  if (m.q < maxv) throw std::invalid_argument("state file: q smaller than largest variable");
  for (int i = 1; i <= m.q; ++i) {
    auto it = vals.find(i);
    if (it == vals.end())
      throw std::invalid_argument("state file: store undefined on x" + std::to_string(i));
    m.store.push_back(it->second);
  }
  if (j.contains("heap")) {
    for (auto it = j["heap"].begin(); it != j["heap"].end(); ++it)
      m.heap[parse_loc(it.key())] = loc_value(it.value());
  }
  return m;
}

MemoryState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return state_from_json(ss.str());
}

void save_state(const MemoryState& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(m, 2) << "\n";
}

std::string show(const MemoryState& m) {
  std::string s = "{";
  for (int i = 1; i <= m.q; ++i) {
    if (i > 1) s += ",";
    s += "x" + std::to_string(i) + ":" + std::to_string(m.s(i));
  }
  s += "} {";
  bool first = true;
  for (auto& [l, v] : m.heap) {
    if (!first) s += ",";
    first = false;
    s += std::to_string(l) + "->" + std::to_string(v);
  }
  return s + "}";
}

}  // namespace slr
