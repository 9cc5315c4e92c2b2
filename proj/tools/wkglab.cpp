// Command-line front end: classification checks, full simulation runs,
// the identity verification suite, and decay fits from ray CSVs.
//
// Exit codes: 0 success, 1 parse/input error, 2 inadmissible coefficients
// (without --force), 3 evolution blow-up, 4 verification identity failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "wkg/pipeline.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_check(const std::string& cfg_path) {
  wkg::RunConfig cfg = wkg::load_config(cfg_path);
  wkg::ClassificationReport rep = wkg::theorem1_admissible(cfg.coeffs);
  std::fputs(wkg::classification_json(rep).c_str(), stdout);
  return rep.theorem1_admissible ? wkg::exit_ok : wkg::exit_inadmissible;
}

int cmd_simulate(const std::string& cfg_path, bool force,
                 const std::string& out_dir) {
  wkg::RunConfig cfg = wkg::load_config(cfg_path);
  auto t0 = std::chrono::steady_clock::now();
  wkg::SimulateResult res = wkg::run_simulation(cfg, force, out_dir);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  wkg::write_outputs(res, cfg, out_dir, wall);
  std::fprintf(stdout, "%s\n", res.message.c_str());
  if (res.exit_code == wkg::exit_ok)
    std::fprintf(stdout, "slices: %zu  steps: %ld\n", res.series.rows.size(),
                 res.steps);
  return res.exit_code;
}

int cmd_verify(const std::vector<std::string>& suites, bool corrupt_box) {
  wkg::VerifySuiteResult res = wkg::run_verify_suite(suites, corrupt_box);
  std::fputs(res.json.c_str(), stdout);
  if (res.exit_code != wkg::exit_ok)
    for (const std::string& f : res.failures)
      std::fprintf(stderr, "identity out of band: %s\n", f.c_str());
  return res.exit_code;
}

int cmd_fit(const std::string& csv_path, const std::string& ray) {
  double r0 = 0.0;
  if (ray.rfind("r=", 0) != 0)
    throw std::invalid_argument("--ray expects the form r=<radius>");
  try {
    r0 = std::stod(ray.substr(2));
  } catch (const std::exception&) {
    throw std::invalid_argument("--ray expects the form r=<radius>");
  }
  wkg::DecayFit fit = wkg::fit_ray_csv(slurp(csv_path), r0);
  std::fprintf(stdout, "exponent_b %.17g\nresidual %.17g\npoints_used %d\n",
               fit.b, fit.residual, fit.points_used);
  return wkg::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wave / Klein-Gordon hyperboloidal laboratory"};
  app.require_subcommand(1);

  std::string cfg_path, out_dir, csv_path, ray = "r=0";
  bool force = false, corrupt_box = false;
  std::vector<std::string> suites;

  CLI::App* check = app.add_subcommand(
      "check", "classify the coefficient set of a config file");
  check->add_option("config", cfg_path, "config file")->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "run the configured experiment");
  simulate->add_option("config", cfg_path, "config file")->required();
  simulate->add_flag("--force", force,
                     "run even with inadmissible coefficients (exploratory)");
  simulate->add_option("--out", out_dir, "directory for output files");

  CLI::App* verify =
      app.add_subcommand("verify", "run the identity verification suite");
  verify->add_option("--suite", suites,
                     "suites to run (default: all): box commutators "
                     "conformal_flat conformal_curved normalform "
                     "modified_energy");
  verify
      ->add_flag("--corrupt-box", corrupt_box,
                 "fault-injection control: corrupt a sign and require the "
                 "suite to catch it")
      ->group("");  // hidden

  CLI::App* fit = app.add_subcommand(
      "fit", "fit a decay exponent along a ray of a t,r,value CSV");
  fit->add_option("csv", csv_path, "CSV file with columns t,r,value")
      ->required();
  fit->add_option("--ray", ray, "ray selector, r=<radius> (default r=0)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return cmd_check(cfg_path);
    if (*simulate) return cmd_simulate(cfg_path, force, out_dir);
    if (*verify) return cmd_verify(suites, corrupt_box);
    return cmd_fit(csv_path, ray);
  } catch (const wkg::ConfigError& e) {
    std::fprintf(stderr, "parse error at %s\n", e.what());
    return wkg::exit_parse;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return wkg::exit_parse;
  }
}
