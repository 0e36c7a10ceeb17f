#include "eqptr/report.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace eqptr {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double compute_si(double j_i, double j_star, double j_initial) {
  if (j_initial == 0) throw std::invalid_argument("compute_si: j_initial = 0");
  return std::abs(j_i - j_star) / j_initial;
}

void write_history_csv(std::ostream& os, const RunResult& rr, double j_star) {
  os << "iteration,j,c_inf,chi_inf,S,usage_min_pct,usage_max_pct,n_hdm,n_rom,n_eqp\n";
  for (std::size_t i = 0; i < rr.result.majors.size(); ++i) {
    const MajorRecord& m = rr.result.majors[i];
    const MajorExtra* x = i < rr.extras.size() ? &rr.extras[i] : nullptr;
    os << m.i << ',' << fmt17(m.j) << ',' << fmt17(m.c_inf) << ',' << fmt17(m.chi_inf) << ','
       << fmt17(compute_si(m.j, j_star, rr.j_initial)) << ','
       << fmt17(x ? 100.0 * x->usage_min : 100.0) << ','
       << fmt17(x ? 100.0 * x->usage_max : 100.0) << ',' << (x ? x->cum_hdm : 0) << ','
       << (x ? x->cum_rom : 0) << ',' << (x ? x->cum_eqp : 0) << '\n';
  }
}

void write_trace_jsonl(std::ostream& os, const RunResult& rr) {
  for (const MajorRecord& m : rr.result.majors) {
    for (const TrIterRecord& t : m.tr_trace) {
      json rec = {
          {"major", m.i},
          {"k", t.k},
          {"delta", t.delta},
          {"chi_m_inf", t.chi_m_inf},
          {"chi_m_2", t.chi_m_2},
          {"chi_true_inf", t.chi_true_inf},
          {"beta", t.beta},
          {"pred_decrease", t.pred_decrease},
          {"actual_decrease", t.actual_decrease},
          {"rho", t.rho},
          {"accepted", t.accepted},
          {"fcd_rhs", t.fcd_rhs},
          {"f_true_center", t.f_true_center},
          {"f_model_center", t.f_model_center},
          {"basis_size", t.basis_size},
          {"eqp_usage", t.eqp_usage},
          {"phi", t.phi},
      };
      os << rec.dump() << '\n';
    }
  }
}

void write_summary_json(std::ostream& os, const RunResult& rr, double j_star) {
  json mu = json::array();
  for (int i = 0; i < rr.result.mu.size(); ++i) mu.push_back(rr.result.mu[i]);
  json s = {
      {"method", rr.config.method},
      {"seed", rr.config.seed},
      {"converged", rr.result.converged},
      {"failed", rr.failed},
      {"error", rr.error},
      {"mu", mu},
      {"j", rr.result.j},
      {"j_star", j_star},
      {"j_initial", rr.j_initial},
      {"S_final", rr.j_initial != 0 ? compute_si(rr.result.j, j_star, rr.j_initial) : 0.0},
      {"c_inf", rr.result.c_inf},
      {"chi_inf", rr.result.chi_inf},
      {"majors", rr.result.majors.size()},
      {"n_hdm", rr.counters.hdm},
      {"n_rom", rr.counters.rom},
      {"n_eqp", rr.counters.eqp},
      {"wall_seconds", rr.wall_seconds},
  };
  os << s.dump(2) << '\n';
}

namespace {

struct CutoffCost {
  bool reached{false};
  long hdm{0}, rom{0}, eqp{0};
  double seconds{0};
};

CutoffCost cost_at_cutoff(const RunResult& rr, double j_star, double eps, double ctol) {
  CutoffCost c;
  double wall = 0;
  for (std::size_t i = 0; i < rr.result.majors.size(); ++i) {
    const MajorRecord& m = rr.result.majors[i];
    wall += m.wall_seconds;
    double si = compute_si(m.j, j_star, rr.j_initial);
    if (si < eps && m.c_inf <= ctol) {
      c.reached = true;
      if (i < rr.extras.size()) {
        c.hdm = rr.extras[i].cum_hdm;
        c.rom = rr.extras[i].cum_rom;
        c.eqp = rr.extras[i].cum_eqp;
      }
      c.seconds = wall;
      return c;
    }
  }
  return c;
}

}  // namespace

void write_comparison_csv(std::ostream& os, const std::vector<NamedRun>& runs, double j_star) {
  const double epss[] = {1e-3, 1e-4, 1e-6};
  const double ctols[] = {1e-4, 1e-5, 1e-6};
  const RunResult* baseline = nullptr;
  for (const auto& r : runs)
    if (r.run->config.method == "hdm") { baseline = r.run; break; }

  os << "eps,ctol,method,n_hdm,n_rom,n_eqp,cost_seconds,speedup\n";
  for (double eps : epss) {
    for (double ctol : ctols) {
      CutoffCost base;
      if (baseline) base = cost_at_cutoff(*baseline, j_star, eps, ctol);
      for (const auto& r : runs) {
        CutoffCost c = cost_at_cutoff(*r.run, j_star, eps, ctol);
        os << fmt17(eps) << ',' << fmt17(ctol) << ',' << r.name << ',';
        if (!c.reached) {
          os << "unreached,unreached,unreached,unreached,unreached\n";
          continue;
        }
        os << c.hdm << ',' << c.rom << ',' << c.eqp << ',' << fmt17(c.seconds) << ',';
        if (baseline && base.reached && c.seconds > 0)
          os << fmt17(base.seconds / c.seconds);
        else
          os << "unreached";
        os << '\n';
      }
    }
  }
}

StudyRow make_study_row(const std::string& label, const RunResult& rr, double pi_star) {
  StudyRow row;
  row.label = label;
  row.tau0 = rr.config.auglag.tau0;
  row.scale_a = rr.config.auglag.scale_a;
  row.snapshot_inherit = rr.config.snapshot_inherit;
  row.converged = rr.result.converged;
  row.failed = rr.failed;
  row.majors = (int)rr.result.majors.size();
  for (std::size_t i = 0; i < rr.result.majors.size(); ++i) {
    if (rr.result.majors[i].c_2 <= pi_star) {
      row.majors_to_feasibility = (int)i + 1;
      break;
    }
  }
  row.j = rr.result.j;
  row.c_inf = rr.result.c_inf;
  row.chi_inf = rr.result.chi_inf;
  row.wall_seconds = rr.wall_seconds;
  return row;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
  os << "label,tau0,scale_a,snapshot_inherit,converged,failed,majors,majors_to_feasibility,"
        "j,c_inf,chi_inf,wall_seconds\n";
  for (const auto& r : rows) {
    os << r.label << ',' << fmt17(r.tau0) << ',' << fmt17(r.scale_a) << ',' << r.snapshot_inherit
       << ',' << (r.converged ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ',' << r.majors << ','
       << r.majors_to_feasibility << ',' << fmt17(r.j) << ',' << fmt17(r.c_inf) << ','
       << fmt17(r.chi_inf) << ',' << fmt17(r.wall_seconds) << '\n';
  }
}

void write_lp_dump(std::ostream& os, const TrainingLp& tlp, const EqpWeights& w) {
  json rows = json::array();
  for (const auto& r : tlp.rows) {
    json coeffs = json::array();
    for (int i = 0; i < r.coeffs.size(); ++i) coeffs.push_back(r.coeffs[i]);
    rows.push_back({{"family", r.family},
                    {"training_point", r.training_point},
                    {"bound", r.bound},
                    {"target", r.target},
                    {"coeffs", coeffs}});
  }
  json rho = json::array();
  for (int i = 0; i < w.rho.size(); ++i) rho.push_back(w.rho[i]);
  json d = {{"n_vars", tlp.lp.n_vars()},
            {"n_rows", tlp.lp.n_rows()},
            {"rows", rows},
            {"rho", rho},
            {"usage_fraction", w.usage_fraction()}};
  os << d.dump(2) << '\n';
}

}  // namespace eqptr
