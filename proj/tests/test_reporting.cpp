#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "eqptr/config.hpp"
#include "eqptr/report.hpp"

using namespace eqptr;

namespace {

MajorRecord major(int i, double j, double c_inf, double c_2, double chi, double wall = 0.0) {
  MajorRecord m;
  m.i = i;
  m.j = j;
  m.c_inf = c_inf;
  m.c_2 = c_2;
  m.chi_inf = chi;
  m.wall_seconds = wall;
  return m;
}

MajorExtra extra(double umin, double umax, long h, long r, long e) {
  MajorExtra x;
  x.usage_min = umin;
  x.usage_max = umax;
  x.cum_hdm = h;
  x.cum_rom = r;
  x.cum_eqp = e;
  return x;
}

}  // namespace

TEST_CASE("compute_si: definition and guard") {
  CHECK(compute_si(0.7, 0.7, 3.0) == 0.0);
  CHECK(compute_si(2.0, 0.0, 2.0) == 1.0);
  CHECK(compute_si(0.5, 0.25, 2.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(compute_si(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("fmt17: shortest 17-digit form round-trips bit-exactly") {
  CHECK(fmt17(0.5) == "0.5");
  CHECK(fmt17(0.1) == "0.10000000000000001");
  CHECK(fmt17(50.0) == "50");
  for (double x : {1.0 / 3.0, M_PI, 1e300, 6.02e23, -1.2345678901234567e-8}) {
    double back = std::strtod(fmt17(x).c_str(), nullptr);
    CHECK(back == x);
  }
}

TEST_CASE("write_history_csv: golden output on dyadic values") {
  RunResult rr;
  rr.j_initial = 2.0;
  rr.result.majors.push_back(major(0, 0.5, 0.25, 0.25, 0.125));
  rr.result.majors.push_back(major(1, 0.25, 0.0, 0.0, 0.0625));
  rr.extras.push_back(extra(0.5, 1.0, 3, 4, 5));
  rr.extras.push_back(extra(0.25, 0.75, 6, 8, 10));

  std::ostringstream os;
  write_history_csv(os, rr, 0.25);
  const std::string expected =
      "iteration,j,c_inf,chi_inf,S,usage_min_pct,usage_max_pct,n_hdm,n_rom,n_eqp\n"
      "0,0.5,0.25,0.125,0.125,50,100,3,4,5\n"
      "1,0.25,0,0.0625,0,25,75,6,8,10\n";
  CHECK(os.str() == expected);
}

TEST_CASE("write_summary_json and write_trace_jsonl are well-formed") {
  RunResult rr;
  rr.j_initial = 1.0;
  rr.result.converged = true;
  rr.result.j = 0.5;
  rr.result.mu = Vec::Constant(2, 0.25);
  MajorRecord m = major(0, 0.5, 0.0, 0.0, 1e-6);
  TrIterRecord t;
  t.k = 0;
  t.delta = 0.1;
  m.tr_trace = {t, t};
  rr.result.majors.push_back(m);
  MajorRecord m2 = major(1, 0.5, 0.0, 0.0, 1e-7);
  t.k = 1;
  m2.tr_trace = {t};
  rr.result.majors.push_back(m2);

  std::ostringstream sj;
  write_summary_json(sj, rr, 0.5);
  auto j = nlohmann::json::parse(sj.str());
  CHECK(j["converged"] == true);
  CHECK(j["j"] == 0.5);
  CHECK(j["S_final"] == 0.0);
  CHECK(j["majors"] == 2);
  CHECK(j["mu"].size() == 2);

  std::ostringstream st;
  write_trace_jsonl(st, rr);
  std::istringstream lines(st.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    auto rec = nlohmann::json::parse(line);
    CHECK(rec.contains("major"));
    CHECK(rec.contains("rho"));
    ++count;
  }
  CHECK(count == 3); // one line per trust-region iteration across majors
}

TEST_CASE("write_comparison_csv: self-speedup of the baseline is 1, misses are marked") {
  RunResult hdm;
  hdm.config.method = "hdm";
  hdm.j_initial = 1.0;
  hdm.result.majors.push_back(major(0, 0.5, 0.0, 0.0, 0.0, 2.0));
  hdm.extras.push_back(extra(1.0, 1.0, 7, 0, 0));

  RunResult never;
  never.config.method = "eqp";
  never.j_initial = 1.0;
  never.result.majors.push_back(major(0, 100.0, 1.0, 1.0, 0.0, 1.0)); // never near j*

  std::ostringstream os;
  write_comparison_csv(os, {{"hdm", &hdm}, {"eqp", &never}}, 0.5);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "eps,ctol,method,n_hdm,n_rom,n_eqp,cost_seconds,speedup");
  int hdm_rows = 0, unreached_rows = 0;
  while (std::getline(in, line)) {
    if (line.find(",hdm,") != std::string::npos) {
      ++hdm_rows;
      CHECK(line.find(",7,0,0,2,1") != std::string::npos); // cum counts, seconds, speedup 1
    }
    if (line.find(",eqp,") != std::string::npos) {
      ++unreached_rows;
      CHECK(line.find("unreached") != std::string::npos);
    }
  }
  CHECK(hdm_rows == 9); // 3 eps x 3 ctol cells
  CHECK(unreached_rows == 9);
}

TEST_CASE("make_study_row and write_study_csv") {
  RunResult rr;
  rr.config.auglag.tau0 = 10.0;
  rr.config.auglag.scale_a = 50.0;
  rr.config.snapshot_inherit = 3;
  rr.result.converged = true;
  rr.result.j = 0.5;
  rr.result.c_inf = 1e-8;
  rr.result.chi_inf = 1e-6;
  rr.result.majors.push_back(major(0, 1.0, 1.0, 1.0, 0.1));
  rr.result.majors.push_back(major(1, 0.5, 1e-8, 1e-8, 1e-6));
  StudyRow row = make_study_row("base", rr, 1e-6);
  CHECK(row.label == "base");
  CHECK(row.tau0 == 10.0);
  CHECK(row.scale_a == 50.0);
  CHECK(row.snapshot_inherit == 3);
  CHECK(row.majors == 2);
  CHECK(row.majors_to_feasibility == 2); // second major is the first with c_2 <= pi*
  CHECK(row.j == 0.5);

  std::ostringstream os;
  write_study_csv(os, {row});
  std::istringstream in(os.str());
  std::string header, data;
  std::getline(in, header);
  CHECK(header ==
        "label,tau0,scale_a,snapshot_inherit,converged,failed,majors,majors_to_feasibility,"
        "j,c_inf,chi_inf,wall_seconds");
  std::getline(in, data);
  CHECK(data.rfind("base,10,50,3,1,0,2,2,0.5,", 0) == 0);
}

TEST_CASE("config parsing: round trip, comments, and sync of kappa_hat") {
  RunConfig cfg = parse_config_text("# a comment\n"
                                    "method = rom\n"
                                    "testbed.n_cells = 48\n"
                                    "testbed.viscosity = 0.05\n"
                                    "auglag.tau0 = 25\n"
                                    "auglag.snapshot_inherit = 4\n"
                                    "trustregion.kappa_hat = 1e-4 # inline comment\n"
                                    "eqp.preset = convergence\n"
                                    "eqp.max_pod = 7\n"
                                    "\n"
                                    "seed = 3\n");
  CHECK(cfg.method == "rom");
  CHECK(cfg.subsolver() == Subsolver::Rom);
  CHECK(cfg.testbed.n_cells == 48);
  CHECK(cfg.testbed.viscosity == 0.05);
  CHECK(cfg.auglag.tau0 == 25.0);
  CHECK(cfg.snapshot_inherit == 4);
  CHECK(cfg.trustregion.kappa_hat == 1e-4);
  CHECK(cfg.schedule.kappa_hat == 1e-4); // synced with the trust-region value
  CHECK(cfg.preset == ConstraintPreset::Convergence);
  CHECK(cfg.max_pod == 7);
  CHECK(cfg.seed == 3u);
}

TEST_CASE("config parsing: rejects bad input") {
  CHECK_THROWS_AS(parse_config_text("nonsense.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("method rom\n"), ConfigError);       // missing '='
  CHECK_THROWS_AS(parse_config_text("auglag.tau0 = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("trustregion.max_iters = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("eqp.preset = everything\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("method = simplex\n"), ConfigError); // validate()
  CHECK_THROWS_AS(parse_config_text("dump_lp = maybe\n"), ConfigError);
}

TEST_CASE("config_grammar documents every section") {
  std::string g = config_grammar();
  CHECK_FALSE(g.empty());
  for (const char* key : {"testbed.n_cells", "auglag.tau0", "trustregion.delta0", "eqp.preset",
                          "method", "seed"})
    CHECK(g.find(key) != std::string::npos);
}
