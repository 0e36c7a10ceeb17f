#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "eqptr/driver.hpp"
#include "eqptr/report.hpp"

namespace fs = std::filesystem;
using namespace eqptr;

namespace {

void write_run_outputs(const fs::path& dir, const RunResult& rr, double j_star) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "history.csv");
    write_history_csv(os, rr, j_star);
  }
  {
    std::ofstream os(dir / "trace.jsonl");
    write_trace_jsonl(os, rr);
  }
  {
    std::ofstream os(dir / "summary.json");
    write_summary_json(os, rr, j_star);
  }
}

RunResult execute(const RunConfig& cfg, const fs::path& out_dir) {
  LpDumpSink sink;
  if (cfg.dump_lp) {
    fs::create_directories(out_dir);
    sink = [out_dir](int major, int build, const TrainingLp& tlp, const EqpWeights& w) {
      std::ofstream os(out_dir / ("lp_major" + std::to_string(major) + "_build" +
                                  std::to_string(build) + ".json"));
      write_lp_dump(os, tlp, w);
    };
  }
  return run_optimization(cfg, sink);
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool dump_lp) {
  RunConfig cfg;
  try {
    cfg = parse_config_file(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (dump_lp) cfg.dump_lp = true;
  fs::path out(cfg.out_dir);

  double j_star = 0;
  try {
    j_star = compute_reference_jstar(cfg);
  } catch (const std::exception& ex) {
    std::cerr << "error: reference run failed: " << ex.what() << "\n";
    return 3;
  }
  RunResult rr = execute(cfg, out);
  write_run_outputs(out, rr, j_star);
  if (rr.failed) {
    std::cerr << "error: solver failure: " << rr.error << "\n";
    return 3;
  }
  std::cout << "converged=" << (rr.result.converged ? 1 : 0) << " j=" << fmt17(rr.result.j)
            << " c_inf=" << fmt17(rr.result.c_inf) << " chi_inf=" << fmt17(rr.result.chi_inf)
            << " majors=" << rr.result.majors.size() << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_override) {
  std::vector<RunConfig> cfgs;
  for (const auto& p : config_paths) {
    try {
      cfgs.push_back(parse_config_file(p));
    } catch (const std::exception& ex) {
      std::cerr << "error: " << ex.what() << "\n";
      return 2;
    }
  }
  fs::path out(out_override.empty() ? cfgs.front().out_dir : out_override);
  fs::create_directories(out);

  double j_star = 0;
  try {
    j_star = compute_reference_jstar(cfgs.front());
  } catch (const std::exception& ex) {
    std::cerr << "error: reference run failed: " << ex.what() << "\n";
    return 3;
  }

  std::vector<RunResult> results(cfgs.size());
  std::vector<NamedRun> named;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    std::string name = fs::path(config_paths[i]).stem().string();
    results[i] = execute(cfgs[i], out / name);
    write_run_outputs(out / name, results[i], j_star);
    named.push_back({name, &results[i]});
  }
  std::ofstream os(out / "comparison.csv");
  write_comparison_csv(os, named, j_star);
  std::cout << "wrote " << (out / "comparison.csv").string() << "\n";
  return 0;
}

int cmd_study(const std::string& kind, const std::string& config_path,
              const std::string& out_override, int workers) {
  RunConfig base;
  try {
    base = parse_config_file(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  fs::path out(out_override.empty() ? base.out_dir : out_override);

  std::vector<std::pair<std::string, RunConfig>> jobs;
  if (kind == "penalty") {
    for (double tau0 : {10.0, 25.0, 50.0})
      for (double a : {10.0, 50.0, 100.0}) {
        RunConfig c = base;
        c.auglag.tau0 = tau0;
        c.auglag.scale_a = a;
        jobs.emplace_back("tau0_" + std::to_string((int)tau0) + "_a_" + std::to_string((int)a), c);
      }
  } else if (kind == "snapshots") {
    for (int m : {0, 5, 15, 20}) {
      RunConfig c = base;
      c.snapshot_inherit = m;
      jobs.emplace_back("inherit_" + std::to_string(m), c);
    }
  } else {
    std::cerr << "error: unknown study kind '" << kind << "' (penalty|snapshots)\n";
    return 2;
  }

  double j_star = 0;
  try {
    j_star = compute_reference_jstar(base);
  } catch (const std::exception& ex) {
    std::cerr << "error: reference run failed: " << ex.what() << "\n";
    return 3;
  }

  fs::create_directories(out);
  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      results[i] = execute(jobs[i].second, out / jobs[i].first);
    }
  };
  workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<StudyRow> rows;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    write_run_outputs(out / jobs[i].first, results[i], j_star);
    rows.push_back(make_study_row(jobs[i].first, results[i], base.auglag.pi_star));
  }
  // Rank by majors-to-feasibility (unreached last), then by wall time.
  std::stable_sort(rows.begin(), rows.end(), [](const StudyRow& a, const StudyRow& b) {
    int fa = a.majors_to_feasibility < 0 ? 1 << 20 : a.majors_to_feasibility;
    int fb = b.majors_to_feasibility < 0 ? 1 << 20 : b.majors_to_feasibility;
    if (fa != fb) return fa < fb;
    return a.wall_seconds < b.wall_seconds;
  });
  std::ofstream os(out / "study.csv");
  write_study_csv(os, rows);
  std::cout << "wrote " << (out / "study.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented-Lagrangian trust-region optimizer with EQP hyperreduction"};
  app.require_subcommand(1);

  std::string out_dir;
  app.add_option("--out", out_dir, "Output directory (overrides config out_dir)");

  std::string run_config;
  bool dump_lp = false;
  auto* run = app.add_subcommand("run", "Execute one optimization config");
  run->add_option("config", run_config, "Config file")->required();
  run->add_flag("--dump-lp", dump_lp, "Dump EQP training LPs to JSON");

  std::vector<std::string> cmp_configs;
  auto* cmp = app.add_subcommand("compare", "Run several configs and tabulate cutoff costs");
  cmp->add_option("configs", cmp_configs, "Config files")->expected(2, -1);

  std::string study_kind, study_config;
  int workers = 1;
  auto* study = app.add_subcommand("study", "Parameter studies (penalty | snapshots)");
  study->add_option("kind", study_kind, "penalty or snapshots")->required();
  study->add_option("config", study_config, "Base config file")->required();
  study->add_option("--workers", workers, "Worker threads (default 1)");

  auto* grammar = app.add_subcommand("grammar", "Print the config file grammar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (grammar->parsed()) {
    std::cout << config_grammar();
    return 0;
  }
  if (run->parsed()) return cmd_run(run_config, out_dir, dump_lp);
  if (cmp->parsed()) return cmd_compare(cmp_configs, out_dir);
  if (study->parsed()) return cmd_study(study_kind, study_config, out_dir, workers);
  return 2;
}
