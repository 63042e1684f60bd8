/* Copyright 2026 The Dagcache Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
//
// dagcache command line: generate workloads, replay them against caching
// policies, and compute placements.
//
//   dagcache generate --kind overlap --jobs 1000 --out trace.jsonl
//   dagcache simulate --trace trace.jsonl --policy lru --capacity 500
//   dagcache solve    --trace trace.jsonl --capacity 500 --method greedy
//   dagcache eval-gain --trace trace.jsonl --placement placement.json
//   dagcache sweep    --trace trace.jsonl --capacities 100,200 --out sweep.csv
//   dagcache verify   --suite all
//
// Exit codes: 0 success, 1 runtime/validation failure (JSON error record on
// stderr), 2 usage error.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagcache/dagcache.hpp"

using namespace dagcache;

namespace {

int emit_error(const char* type, const std::string& message) {
  nlohmann::json rec = {{"error", {{"type", type}, {"message", message}}}};
  std::cerr << rec.dump() << "\n";
  return 1;
}

void write_text(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing", 0);
  fn(out);
  if (!out.good()) throw ParseError(path + ": write failed", 0);
}

bool wants_json(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

std::string entry_label(const Catalog& cat, EntryId e) {
  const CatalogEntry& ent = cat.entry(e);
  return cat.job_dag(ent.first_job).node(ent.first_node).op_label;
}

void save_placement(const Catalog& cat, const Placement& x, double gain,
                    const std::string& method, std::ostream& out) {
  nlohmann::json entries = nlohmann::json::array();
  for (EntryId e : x.entries()) {
    const CatalogEntry& ent = cat.entry(e);
    entries.push_back({{"fp", ent.fp.hex()},
                       {"op", entry_label(cat, e)},
                       {"cost_s", ent.cost_s},
                       {"size_mb", ent.size_mb}});
  }
  nlohmann::json j = {{"schema", "dagcache-placement"},
                      {"version", 1},
                      {"method", method},
                      {"capacity_mb", x.capacity_mb},
                      {"used_mb", placement_used_mb(cat, x)},
                      {"gain", gain},
                      {"entries", entries}};
  out << j.dump(2) << "\n";
}

Placement load_placement(const Catalog& cat, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file", 0);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": invalid JSON: " + e.what(), 0);
  }
  if (j.value("schema", "") != "dagcache-placement" || j.value("version", 0) != 1)
    throw ParseError(path + ": not a dagcache-placement v1 file", 0);
  Placement x = Placement::empty(cat, j.value("capacity_mb", 0.0));
  for (const auto& ent : j.at("entries")) {
    Fingerprint fp;
    if (!Fingerprint::from_hex(ent.at("fp").get<std::string>(), &fp))
      throw ParseError(path + ": malformed fingerprint", 0);
    auto e = cat.find(fp);
    if (!e)
      throw ConsistencyError("placement references fingerprint " + fp.hex() +
                             " absent from the trace catalog");
    x.cached[*e] = true;
  }
  return x;
}

void print_report(const RunReport& r, std::ostream& out) {
  using detail::fmt_double;
  out << "policy=" << format_policy(r.policy) << "\n"
      << "capacity_mb=" << fmt_double(r.capacity_mb) << "\n"
      << "seed=" << r.seed << "\n"
      << "jobs=" << r.jobs << "\n"
      << "accessed_rdds=" << r.accessed_rdds << "\n"
      << "hits=" << r.hits << "\n"
      << "hit_ratio_count=" << fmt_double(r.hit_ratio_count()) << "\n"
      << "accessed_bytes_mb=" << fmt_double(r.accessed_bytes_mb) << "\n"
      << "hit_bytes_mb=" << fmt_double(r.hit_bytes_mb) << "\n"
      << "hit_ratio_bytes=" << fmt_double(r.hit_ratio_bytes()) << "\n"
      << "total_work_s=" << fmt_double(r.total_work_s) << "\n"
      << "makespan_s=" << fmt_double(r.makespan_s) << "\n"
      << "avg_waiting_s=" << fmt_double(r.avg_waiting_s) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dagcache: cost-aware cache placement for multi-stage dataflow jobs"};
  app.set_version_flag("--version", DAGCACHE_VERSION);
  app.require_subcommand(1);
  // One INI file can seed any subcommand through its section, e.g.
  // [generate] followed by jobs=200. Subcommands fall through so --config
  // may appear after the subcommand name.
  app.set_config("--config", "", "Read option defaults from an INI file");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Generate a workload trace");
  gen->fallthrough();
  std::string gen_kind = "overlap";
  gen->add_option("--kind", gen_kind, "Workload family")
      ->check(CLI::IsMember({"overlap", "regression"}));
  std::size_t gen_jobs = 0;  // 0 = family default
  gen->add_option("--jobs", gen_jobs, "Number of jobs (0 = family default)");
  std::uint64_t gen_seed = 1;
  gen->add_option("--seed", gen_seed, "Generator seed");
  GeneratorConfig gc;
  gen->add_option("--stages", gc.stages_per_job, "Stages per job");
  gen->add_option("--rdds-per-stage", gc.rdds_per_stage, "Nodes per stage");
  gen->add_option("--mean-size", gc.mean_size_mb, "Mean output size (MB)");
  gen->add_option("--overlap-pool", gc.overlap_pool, "Shared stage template pool size");
  gen->add_option("--overlap-prob", gc.overlap_prob, "Per-stage template probability");
  gen->add_option("--cost-min", gc.cost_min_s, "Minimum node cost (s)");
  gen->add_option("--cost-max", gc.cost_max_s, "Maximum node cost (s)");
  std::string gen_arrivals = "exp";
  gen->add_option("--arrivals", gen_arrivals, "Arrival model")
      ->check(CLI::IsMember({"exp", "fixed"}));
  gen->add_option("--mean-interarrival", gc.mean_interarrival_s, "Mean arrival gap (s)");
  RegressionConfig rc;
  gen->add_option("--features", rc.num_features, "Feature count (regression kind)");
  gen->add_option("--repeat-prob", rc.repeat_prob, "Subset repeat probability (regression kind)");
  gen->add_option("--interarrival", rc.interarrival_s, "Fixed arrival gap (regression kind)");
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output trace path")->required();

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Replay a trace against one policy");
  sim->alias("run");
  sim->fallthrough();
  std::string sim_trace, sim_policy, sim_update = "evict-insert", sim_out;
  RunConfig sim_cfg;
  bool sim_per_job = false, sim_diag = false;
  sim->add_option("--trace", sim_trace, "Trace path or builtin:simple")->required();
  sim->add_option("--policy", sim_policy, "Caching policy")
      ->required()
      ->check(CLI::IsMember({"nocache", "fifo", "lru", "lcs", "heuristic", "adaptive-grad"}));
  sim->add_option("--capacity", sim_cfg.capacity_mb, "Cache capacity (MB)")->required();
  sim->add_option("--seed", sim_cfg.seed, "Run seed");
  sim->add_option("--beta", sim_cfg.beta, "Score decay (heuristic)");
  sim->add_option("--update-mode", sim_update, "Cache reshaping mode (heuristic)")
      ->check(CLI::IsMember({"refresh", "evict-insert"}));
  sim->add_option("--period", sim_cfg.period_s, "Measurement period (s, adaptive-grad; default: trace mean interarrival)");
  sim->add_option("--gamma0", sim_cfg.gamma0, "Step scale (adaptive-grad, 0 = auto)");
  sim->add_option("--max-window", sim_cfg.max_window, "Smoothening window cap (adaptive-grad)");
  sim->add_flag("--per-job", sim_per_job, "Record per-job rows in JSON output");
  sim->add_flag("--diag", sim_diag, "Log period boundaries to stderr (adaptive-grad)");
  sim->add_option("--out", sim_out, "Write the report to a .csv or .json file");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "Compute an offline placement for a trace");
  solve->fallthrough();
  std::string solve_trace, solve_method = "greedy", solve_out;
  double solve_capacity = 0.0;
  RelaxOptions solve_relax;
  std::uint64_t solve_seed = 1;
  solve->add_option("--trace", solve_trace, "Trace path or builtin:simple")->required();
  solve->add_option("--capacity", solve_capacity, "Cache capacity (MB)")->required();
  solve->add_option("--method", solve_method, "Solver")
      ->check(CLI::IsMember({"greedy", "relax", "relax-round"}));
  solve->add_option("--iterations", solve_relax.iterations, "Ascent iterations");
  solve->add_option("--gamma0", solve_relax.gamma0, "Step scale (0 = auto)");
  solve->add_option("--max-window", solve_relax.max_window, "Smoothening window cap");
  solve->add_option("--seed", solve_seed, "Rounding seed");
  solve->add_option("--out", solve_out, "Placement JSON path");

  // ---- eval-gain ----
  auto* eval = app.add_subcommand("eval-gain", "Evaluate a placement file against a trace");
  eval->fallthrough();
  std::string eval_trace, eval_placement;
  eval->add_option("--trace", eval_trace, "Trace path or builtin:simple")->required();
  eval->add_option("--placement", eval_placement, "Placement JSON path")->required();

  // ---- sweep ----
  auto* sw = app.add_subcommand("sweep", "Run a policy x capacity x seed grid");
  sw->fallthrough();
  std::string sw_trace, sw_update = "evict-insert", sw_out;
  std::vector<std::string> sw_policies = {"nocache", "fifo",      "lru",
                                          "lcs",     "heuristic", "adaptive-grad"};
  std::vector<double> sw_capacities;
  std::vector<std::uint64_t> sw_seeds = {1};
  SweepConfig sw_cfg;
  sw->add_option("--trace", sw_trace, "Trace path or builtin:simple")->required();
  sw->add_option("--policies", sw_policies, "Policies to sweep")->delimiter(',');
  sw->add_option("--capacities", sw_capacities, "Capacities (MB)")
      ->delimiter(',')
      ->required();
  sw->add_option("--seeds", sw_seeds, "Run seeds")->delimiter(',');
  sw->add_option("--beta", sw_cfg.base.beta, "Score decay (heuristic)");
  sw->add_option("--update-mode", sw_update, "Cache reshaping mode (heuristic)")
      ->check(CLI::IsMember({"refresh", "evict-insert"}));
  sw->add_option("--period", sw_cfg.base.period_s, "Measurement period (s, adaptive-grad; default: trace mean interarrival)");
  sw->add_option("--gamma0", sw_cfg.base.gamma0, "Step scale (adaptive-grad, 0 = auto)");
  sw->add_option("--max-window", sw_cfg.base.max_window, "Smoothening window cap");
  sw->add_option("--jobs", sw_cfg.threads, "Worker threads for independent runs");
  sw->add_option("--out", sw_out, "Write rows to a .csv or .json file");

  // ---- verify ----
  auto* ver = app.add_subcommand("verify", "Run the built-in self checks");
  ver->fallthrough();
  std::string ver_suite = "all";
  std::uint64_t ver_seed = 1;
  ver->add_option("--suite", ver_suite, "table1|sandwich|estimator|convergence|all");
  ver->add_option("--seed", ver_seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::json rec = {{"error", {{"type", "usage"}, {"message", e.what()}}}};
    std::cerr << rec.dump() << "\n";
    return 2;
  }

  try {
    if (*gen) {
      Trace tr;
      if (gen_kind == "regression") {
        if (gen_jobs) rc.num_jobs = gen_jobs;
        rc.seed = gen_seed;
        tr = generate_regression_trace(rc);
      } else {
        if (gen_jobs) gc.num_jobs = gen_jobs;
        gc.seed = gen_seed;
        gc.arrivals = gen_arrivals == "fixed" ? ArrivalModel::Fixed : ArrivalModel::Exponential;
        tr = generate_trace(gc);
      }
      save_trace(tr, gen_out);
      std::cout << "wrote " << tr.dags.size() << " jobs, " << tr.arrivals.size()
                << " arrivals to " << gen_out << "\n";
    } else if (*sim) {
      Trace tr = load_trace_or_builtin(sim_trace);
      sim_cfg.policy = parse_policy(sim_policy);
      sim_cfg.update_mode = parse_update_mode(sim_update);
      sim_cfg.record_per_job = sim_per_job;
      sim_cfg.diagnostics = sim_diag ? &std::cerr : nullptr;
      RunReport rep = run(tr, sim_cfg);
      print_report(rep, std::cout);
      if (!sim_out.empty()) {
        write_text(sim_out, [&](std::ostream& out) {
          if (wants_json(sim_out))
            out << report_to_json(rep).dump(2) << "\n";
          else
            write_report_csv(rep, out);
        });
      }
    } else if (*solve) {
      Trace tr = load_trace_or_builtin(solve_trace);
      Catalog cat = tr.build_catalog();
      Placement x = Placement::empty(cat, solve_capacity);
      double gain = 0.0;
      if (solve_method == "greedy") {
        x = greedy(cat, solve_capacity);
        gain = caching_gain(cat, x);
      } else {
        RelaxResult rr = maximize_relaxation(cat, solve_capacity, solve_relax);
        if (solve_method == "relax-round") {
          x = round(cat, rr.state, solve_seed);
          gain = caching_gain(cat, x);
        } else {
          // Report the relaxation itself; the emitted placement is its
          // rounding, labeled as such.
          x = round(cat, rr.state, solve_seed);
          gain = rr.gain;
        }
        std::cout << "relaxed_gain=" << detail::fmt_double(rr.gain)
                  << " best_iteration=" << rr.best_iteration << "\n";
      }
      std::cout << "method=" << solve_method << "\n"
                << "entries=" << x.entries().size() << "\n"
                << "used_mb=" << detail::fmt_double(placement_used_mb(cat, x)) << "\n"
                << "caching_gain=" << detail::fmt_double(caching_gain(cat, x)) << "\n";
      if (!solve_out.empty()) {
        write_text(solve_out, [&](std::ostream& out) {
          save_placement(cat, x, gain, solve_method, out);
        });
      }
    } else if (*eval) {
      Trace tr = load_trace_or_builtin(eval_trace);
      Catalog cat = tr.build_catalog();
      Placement x = load_placement(cat, eval_placement);
      validate_placement(cat, x);
      const double base = expected_total_work(cat);
      const double gain = caching_gain(cat, x);
      std::cout << "entries=" << x.entries().size() << "\n"
                << "used_mb=" << detail::fmt_double(placement_used_mb(cat, x)) << "\n"
                << "capacity_mb=" << detail::fmt_double(x.capacity_mb) << "\n"
                << "caching_gain=" << detail::fmt_double(gain) << "\n"
                << "baseline_work_rate=" << detail::fmt_double(base) << "\n"
                << "expected_work_rate=" << detail::fmt_double(base - gain) << "\n";
    } else if (*sw) {
      Trace tr = load_trace_or_builtin(sw_trace);
      sw_cfg.base.update_mode = parse_update_mode(sw_update);
      sw_cfg.policies.clear();
      for (const std::string& p : sw_policies) sw_cfg.policies.push_back(parse_policy(p));
      sw_cfg.capacities_mb = sw_capacities;
      sw_cfg.seeds = sw_seeds;
      std::vector<SweepCell> cells = sweep(tr, sw_cfg);
      std::size_t failed = 0;
      for (const SweepCell& c : cells)
        if (!c.ok) ++failed;
      write_text(sw_out, [&](std::ostream& out) {
        if (wants_json(sw_out))
          write_sweep_json(cells, out);
        else
          write_sweep_csv(cells, out);
      });
      if (failed) std::cerr << failed << " of " << cells.size() << " runs failed\n";
    } else if (*ver) {
      VerifyReport rep = verify_suite(ver_suite, ver_seed);
      for (const VerifyItem& item : rep.items)
        std::cout << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << ": " << item.detail
                  << "\n";
      return rep.all_pass() ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    return emit_error("validation", e.what());
  } catch (const ParseError& e) {
    return emit_error("parse", e.what());
  } catch (const ConsistencyError& e) {
    return emit_error("consistency", e.what());
  } catch (const SolverError& e) {
    return emit_error("solver", e.what());
  } catch (const std::exception& e) {
    return emit_error("internal", e.what());
  }
  return 0;
}
