#include "eqptr/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace eqptr {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  int i = (int)d;
  if ((double)i != d) throw ConfigError("config: expected integer for '" + key + "': " + v);
  return i;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: expected boolean for '" + key + "': " + v);
}

}  // namespace

Subsolver RunConfig::subsolver() const {
  if (method == "hdm") return Subsolver::Hdm;
  if (method == "rom") return Subsolver::Rom;
  if (method == "eqp") return Subsolver::Eqp;
  throw ConfigError("config: method must be hdm, rom, or eqp (got '" + method + "')");
}

void RunConfig::validate() const {
  testbed.validate();
  auglag.validate();
  trustregion.validate();
  (void)subsolver();
  if (snapshot_inherit < 0) throw ConfigError("config: auglag.snapshot_inherit < 0");
  if (max_pod < 0) throw ConfigError("config: eqp.max_pod < 0");
  if (fd_eps <= 0) throw ConfigError("config: eqp.fd_eps <= 0");
  if (schedule.kappa <= 0 || schedule.kappa_hat <= 0)
    throw ConfigError("config: eqp kappa values must be positive");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: missing '=' on line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config: empty key or value on line " + std::to_string(lineno));

    if (key == "testbed.n_cells") cfg.testbed.n_cells = to_int(key, val);
    else if (key == "testbed.viscosity") cfg.testbed.viscosity = to_double(key, val);
    else if (key == "testbed.n_design") cfg.testbed.n_design = to_int(key, val);
    else if (key == "testbed.bc_left") cfg.testbed.bc_left = to_double(key, val);
    else if (key == "testbed.bc_right") cfg.testbed.bc_right = to_double(key, val);
    else if (key == "testbed.design_lower") cfg.testbed.design_lower = to_double(key, val);
    else if (key == "testbed.design_upper") cfg.testbed.design_upper = to_double(key, val);
    else if (key == "testbed.bump_width") cfg.testbed.bump_width = to_double(key, val);
    else if (key == "testbed.use_equality") cfg.testbed.use_equality = to_bool(key, val);
    else if (key == "testbed.use_inequality") cfg.testbed.use_inequality = to_bool(key, val);
    else if (key == "testbed.slack_upper") cfg.testbed.slack_upper = to_double(key, val);
    else if (key == "auglag.tau0") cfg.auglag.tau0 = to_double(key, val);
    else if (key == "auglag.scale_a") cfg.auglag.scale_a = to_double(key, val);
    else if (key == "auglag.pi_star") cfg.auglag.pi_star = to_double(key, val);
    else if (key == "auglag.omega_star") cfg.auglag.omega_star = to_double(key, val);
    else if (key == "auglag.max_major_iters") cfg.auglag.max_major_iters = to_int(key, val);
    else if (key == "auglag.snapshot_inherit") cfg.snapshot_inherit = to_int(key, val);
    else if (key == "trustregion.delta0") cfg.trustregion.delta0 = to_double(key, val);
    else if (key == "trustregion.eta1") cfg.trustregion.eta1 = to_double(key, val);
    else if (key == "trustregion.eta2") cfg.trustregion.eta2 = to_double(key, val);
    else if (key == "trustregion.gamma1") cfg.trustregion.gamma1 = to_double(key, val);
    else if (key == "trustregion.gamma2") cfg.trustregion.gamma2 = to_double(key, val);
    else if (key == "trustregion.delta_max") cfg.trustregion.delta_max = to_double(key, val);
    else if (key == "trustregion.max_iters") cfg.trustregion.max_iters = to_int(key, val);
    else if (key == "trustregion.kappa_hat") {
      cfg.trustregion.kappa_hat = to_double(key, val);
      cfg.schedule.kappa_hat = cfg.trustregion.kappa_hat;
    } else if (key == "eqp.preset") {
      if (val == "full") cfg.preset = ConstraintPreset::Full;
      else if (val == "convergence") cfg.preset = ConstraintPreset::Convergence;
      else throw ConfigError("config: eqp.preset must be full or convergence");
    }
    else if (key == "eqp.kappa") cfg.schedule.kappa = to_double(key, val);
    else if (key == "eqp.kappa_hat") cfg.schedule.kappa_hat = to_double(key, val);
    else if (key == "eqp.delta_dv") cfg.schedule.delta_dv = to_double(key, val);
    else if (key == "eqp.delta_lq") cfg.schedule.delta_lq = to_double(key, val);
    else if (key == "eqp.delta_rs") cfg.schedule.delta_rs = to_double(key, val);
    else if (key == "eqp.delta_min") cfg.schedule.delta_min = to_double(key, val);
    else if (key == "eqp.max_pod") cfg.max_pod = to_int(key, val);
    else if (key == "eqp.fd_eps") cfg.fd_eps = to_double(key, val);
    else if (key == "method") cfg.method = val;
    else if (key == "seed") cfg.seed = (unsigned)to_int(key, val);
    else if (key == "out_dir") cfg.out_dir = val;
    else if (key == "dump_lp") cfg.dump_lp = to_bool(key, val);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_grammar() {
  return "Config grammar: one 'key = value' per line; '#' starts a comment.\n"
         "Keys:\n"
         "  testbed.n_cells (int), testbed.viscosity, testbed.n_design (int),\n"
         "  testbed.bc_left, testbed.bc_right, testbed.design_lower,\n"
         "  testbed.design_upper, testbed.bump_width,\n"
         "  testbed.use_equality (bool), testbed.use_inequality (bool),\n"
         "  testbed.slack_upper\n"
         "  auglag.tau0, auglag.scale_a, auglag.pi_star, auglag.omega_star,\n"
         "  auglag.max_major_iters (int), auglag.snapshot_inherit (int)\n"
         "  trustregion.delta0, trustregion.eta1, trustregion.eta2,\n"
         "  trustregion.gamma1, trustregion.gamma2, trustregion.delta_max,\n"
         "  trustregion.max_iters (int), trustregion.kappa_hat\n"
         "  eqp.preset (full|convergence), eqp.kappa, eqp.kappa_hat,\n"
         "  eqp.delta_dv, eqp.delta_lq, eqp.delta_rs, eqp.delta_min,\n"
         "  eqp.max_pod (int), eqp.fd_eps\n"
         "  method (hdm|rom|eqp), seed (int), out_dir (string), dump_lp (bool)\n";
}

}  // namespace eqptr
