// slr: command-line front end.  Exit status 0 = SAT/true, 1 = UNSAT/false,
// 2 = usage or input error, 3 = solver could not decide.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "slr/formula.hpp"
#include "slr/fowand.hpp"
#include "slr/mcheck.hpp"
#include "slr/memstate.hpp"
#include "slr/sgraph.hpp"
#include "slr/solver.hpp"
#include "slr/testform.hpp"

using namespace slr;
using nlohmann::json;

namespace {

constexpr int kTrue = 0, kFalse = 1, kUsage = 2, kUnknown = 3;

struct Out {
  bool as_json = false;
  json doc = json::object();
  std::vector<std::string> lines;

  void line(std::string s) { lines.push_back(std::move(s)); }
  int finish(int code) {
    if (as_json) {
      doc["exit"] = code;
      std::cout << doc.dump(2) << "\n";
    } else {
      for (auto& l : lines) std::cout << l << "\n";
    }
    return code;
  }
};

WandPolicy pick_policy(const Formula& f, int bound, int fresh) {
  if (!has_wand(f)) return WandPolicy::forbid();
  if (bound >= 0 || fresh >= 0) {
    unsigned b = bound >= 0 ? static_cast<unsigned>(bound) : 4;
    unsigned k = fresh >= 0 ? static_cast<unsigned>(fresh) : b;
    return WandPolicy::bounded(b, k);
  }
  if (in_fragment(f, Fragment::SL_STAR_WAND)) {
    auto b = static_cast<unsigned>(sl_star_wand_bound(f));
    return WandPolicy::bounded(b, b);
  }
  return WandPolicy::bounded(4, 4);
}

SolverChoice parse_choice(const std::string& s) {
  if (s == "auto") return SolverChoice::Auto;
  if (s == "reachplus") return SolverChoice::ReachPlus;
  if (s == "boolshf") return SolverChoice::BoolShf;
  if (s == "boolcomb") return SolverChoice::BoolComb;
  throw CLI::ValidationError("--fragment", "expected auto|reachplus|boolshf|boolcomb");
}

// lets "-m1 FILE" and "-m2 FILE" through CLI11, which only has 1-char short flags
std::vector<std::string> normalise(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "-m1" || a == "-m2") a = "-" + a;
    args.push_back(a);
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"separation logic checker, solver and abstraction tools"};
  app.require_subcommand(1);
  Out out;
  app.add_flag("--json", out.as_json, "machine-readable output");

  std::string formula, formula2, state, state2, fo, model_out, fragment = "auto";
  int wand_bound = -1, fresh = -1, q = -1, qtr = 0;
  unsigned alpha = 1;

  auto* chk = app.add_subcommand("check", "model check a formula on a state file");
  chk->add_option("-f,--formula", formula)->required();
  chk->add_option("-m,--model", state)->required();
  chk->add_option("--wand-bound", wand_bound);
  chk->add_option("--fresh", fresh);

  auto* sat = app.add_subcommand("sat", "decide satisfiability");
  sat->add_option("-f,--formula", formula)->required();
  sat->add_option("--fragment", fragment);
  sat->add_option("-o,--out", model_out, "write the model to this file");

  auto* ent = app.add_subcommand("entail", "decide f |= g");
  ent->add_option("-f", formula)->required();
  ent->add_option("-g", formula2)->required();
  ent->add_option("-o,--out", model_out, "write the counter-model to this file");

  auto* tr = app.add_subcommand("translate", "translate a first-order formula");
  tr->add_option("--fo", fo)->required();
  tr->add_option("-q", qtr, "variables of the source (default: largest index)");

  auto* abst = app.add_subcommand("abstract", "support graph and literal profile");
  abst->add_option("-m,--model", state)->required();
  abst->add_option("-q", q);
  abst->add_option("--alpha", alpha);

  auto* eqv = app.add_subcommand("equiv", "compare two states at alpha");
  eqv->add_option("--m1", state)->required();
  eqv->add_option("--m2", state2)->required();
  eqv->add_option("--alpha", alpha)->required();

  auto* shr = app.add_subcommand("shrink", "replace a state by a small alpha-equivalent one");
  shr->add_option("-m,--model", state)->required();
  shr->add_option("--alpha", alpha)->required();
  shr->add_option("-q", q);
  shr->add_option("-o,--out", model_out, "output state file (default: stdout)");

  try {
    app.parse(normalise(argc, argv));
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  auto load_q = [&](const std::string& path) {
    MemoryState m = load_state(path);
    if (q >= 0 && m.q != q)
      throw std::invalid_argument("state has q = " + std::to_string(m.q) + ", not " + std::to_string(q));
    return m;
  };

  try {
    if (*chk) {
      MemoryState m = load_state(state);
      Formula f = parse(formula);
      if (max_var(f) > m.q) throw std::invalid_argument("formula uses variables beyond the store");
      WandPolicy p = pick_policy(f, wand_bound, fresh);
      CheckResult r = slr::check(m, f, p);
      out.doc["value"] = r.value;
      out.doc["complete"] = r.complete;
      if (p.mode == WandPolicy::Mode::Bounded) out.doc["policy"] = {{"cells", p.cell_bound}, {"fresh", p.fresh_locations}};
      out.line(r.value ? "true" : "false");
      out.line(std::string("complete: ") + (r.complete ? "yes" : "no"));
      return out.finish(r.value ? kTrue : kFalse);
    }
    if (*sat) {
      Formula f = parse(formula);
      SatResult r = solve(f, parse_choice(fragment));
      out.doc["status"] = to_string(r.status);
      out.doc["bound"] = r.bound;
      out.doc["explored"] = r.explored;
      if (r.status == SatResult::Status::Sat) {
        out.line("SAT");
        out.doc["model"] = json::parse(to_json(*r.model));
        if (!model_out.empty()) {
          save_state(*r.model, model_out);
          out.line("model: " + model_out);
        } else {
          out.line(to_json(*r.model));
        }
        return out.finish(kTrue);
      }
      out.line(r.status == SatResult::Status::Unsat ? "UNSAT" : "UNKNOWN");
      return out.finish(r.status == SatResult::Status::Unsat ? kFalse : kUnknown);
    }
    if (*ent) {
      Entailment e = entails(parse(formula), parse(formula2));
      out.doc["holds"] = e.holds;
      out.line(e.holds ? "VALID" : "INVALID");
      if (e.counter_model) {
        out.doc["counter_model"] = json::parse(to_json(*e.counter_model));
        if (!model_out.empty()) {
          save_state(*e.counter_model, model_out);
          out.line("counter-model: " + model_out);
        } else {
          out.line(to_json(*e.counter_model));
        }
      }
      return out.finish(e.holds ? kTrue : kFalse);
    }
    if (*tr) {
      FoFormula psi = parse_fo(fo);
      std::string ts = print(t_sat(psi, qtr)), tv = print(t_val(psi, qtr));
      out.doc["t_sat"] = ts;
      out.doc["t_val"] = tv;
      out.line("T_SAT: " + ts);
      out.line("T_VAL: " + tv);
      return out.finish(kTrue);
    }
    if (*abst) {
      MemoryState m = load_q(state);
      std::string g = dump(build(m)), p = dump(profile(m, alpha));
      out.doc["support_graph"] = g;
      out.doc["profile"] = p;
      out.line(g);
      out.line(p);
      return out.finish(kTrue);
    }
    if (*eqv) {
      MemoryState m1 = load_state(state), m2 = load_state(state2);
      if (m1.q != m2.q) throw std::invalid_argument("states have different q");
      bool e = equivalent(m1, m2, alpha);
      out.doc["equivalent"] = e;
      out.line(e ? "EQUIVALENT" : "DISTINCT");
      return out.finish(e ? kTrue : kFalse);
    }
    if (*shr) {
      MemoryState m = load_q(state);
      MemoryState s = shrink(m, alpha);
      out.doc["cells_before"] = m.heap.size();
      out.doc["cells_after"] = s.heap.size();
      if (out.as_json) {
        out.doc["state"] = json::parse(to_json(s));
        if (!model_out.empty()) save_state(s, model_out);
        return out.finish(kTrue);
      }
      if (model_out.empty()) {
        std::cout << to_json(s, 2) << "\n";
        return kTrue;
      }
      save_state(s, model_out);
      out.line("cells: " + std::to_string(m.heap.size()) + " -> " + std::to_string(s.heap.size()));
      return out.finish(kTrue);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
