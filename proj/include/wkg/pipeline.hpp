#pragma once
// Orchestration layer behind the command-line tool: a full simulation run
// (classify, evolve, per-slice diagnostics, decay fits, bootstrap verdict,
// deterministic CSV/JSON emission), the identity verification suite, and
// the decay-fit helper for ray CSVs.  Everything here is deterministic for
// identical inputs; wall-clock time never enters the CSV/JSON payloads.

#include <string>
#include <vector>

#include "wkg/config.hpp"
#include "wkg/diagnostics.hpp"
#include "wkg/verify.hpp"

namespace wkg {

// Exit codes shared by the tool and the orchestration functions.
enum ExitCode {
  exit_ok = 0,
  exit_parse = 1,        // config / input file unreadable or malformed
  exit_inadmissible = 2, // strong coupling or admissibility failure, no --force
  exit_blowup = 3,       // evolution lost hyperbolicity or went non-finite
  exit_identity = 4,     // a verification identity out of its band
};

// Interior fits run along the r = 0 ray (the KG component via its
// oscillation quadrature amplitude sqrt(v^2 + (v_t/c)^2)); the near-cone
// fit tracks the gradient magnitude at the rim-most record of each slice.
// Abscissa is elapsed time since the data slice (the tails scale in
// elapsed time), restricted to the late two thirds of the window when
// enough slices survive.
struct FitSummary {
  bool available = false;
  DecayFit fit;
  std::string note;  // reason when unavailable
};

struct SimulateResult {
  int exit_code = exit_ok;
  std::string message;
  bool exploratory = false;  // strong coupling run forced through
  ClassificationReport classification;
  EnergySeries series;
  BootstrapVerdict bootstrap;
  FconConstants fcon;
  double growth_defect = 0.0;  // weighted-norm monotonicity defect (C = 4)
  FitSummary wave_interior, kg_interior, near_cone_gradient;
  long steps = 0;
  double blowup_t = 0.0;  // last finite time reached (exit_blowup only)
  std::string csv;        // series CSV (empty when no slice completed)
  std::string json;       // full report, fixed key order
};

// Runs the configured experiment.  On classification failure without
// `force`, returns exit_inadmissible with the report filled in.  On
// blow-up, replays the evolution step by step, writes the last finite
// state to the configured checkpoint path (prefixed with out_dir when
// non-empty) and returns exit_blowup.  Never throws for those two paths;
// config-level inconsistencies still surface as exceptions.
SimulateResult run_simulation(const RunConfig& cfg, bool force,
                              const std::string& out_dir = "");

// Writes result.csv / result.json to the configured paths (under out_dir
// when non-empty) plus a timing sidecar `<json>.timing` holding the wall
// seconds -- the only place timing appears.
void write_outputs(const SimulateResult& r, const RunConfig& cfg,
                   const std::string& out_dir, double wall_seconds);

// Classification-only report (the `check` subcommand payload).
std::string classification_json(const ClassificationReport& rep);

struct VerifyCheck {
  std::string suite;     // which family
  std::string detail;    // field / sub-identity
  double analytic = 0.0; // exact-derivative residual
  double ratio = 0.0;    // FD residual ratio under h -> h/2 (0 = not run)
  bool pass = false;
};

struct VerifySuiteResult {
  int exit_code = exit_ok;
  std::vector<VerifyCheck> checks;
  std::vector<std::string> failures;  // names of failed checks
  std::string json;
};

// Suites: box, commutators, conformal_flat, conformal_curved, normalform,
// modified_energy.  Empty selection = all.  Analytic residuals must sit at
// round-off and FD ratios inside [3, 5]; any miss gives exit_identity.
// corrupt_box flips a sign inside the D'Alembertian decomposition
// (fault-injection control: the suite must fail and name the check).
VerifySuiteResult run_verify_suite(const std::vector<std::string>& suites,
                                   bool corrupt_box = false);

// Parses a CSV with header containing columns t,r,value, keeps the rows
// with |r - r0| <= tol, and fits the interior decay model |value| ~ t^b.
DecayFit fit_ray_csv(const std::string& csv_text, double r0,
                     double tol = 1e-9);

}  // namespace wkg
