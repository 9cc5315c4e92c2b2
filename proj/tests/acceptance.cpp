// Acceptance gate: ten end-to-end checks of the laboratory, one verdict
// line each.  Criterion 9 (strong-vs-weak decay contrast) is exploratory
// and downgrades to a warning; every other miss fails the binary.
//
// The heavy criteria (4, 8, 9) evolve real grids and together dominate the
// runtime (tens of minutes at the pinned resolutions).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "wkg/config.hpp"
#include "wkg/diagnostics.hpp"
#include "wkg/evolve.hpp"
#include "wkg/forms.hpp"
#include "wkg/geometry.hpp"
#include "wkg/normalform.hpp"
#include "wkg/pipeline.hpp"
#include "wkg/tower.hpp"
#include "wkg/verify.hpp"

using namespace wkg;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

int failures = 0;

void verdict(int n, bool pass, bool soft, const std::string& text) {
  const char* tag = pass ? "PASS" : (soft ? "WARN" : "FAIL");
  if (!pass && !soft) ++failures;
  std::printf("%s criterion %2d: %s\n", tag, n, text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- criterion 1: null classifier vs dense angular oracle ------------------

bool oracle_null(const MultilinearForm& f) {
  for (int m = 0; m < 1000; ++m) {
    double th = 2.0 * M_PI * m / 1000.0;
    Rank1 xi = {1.0, std::cos(th), std::sin(th)};
    if (std::fabs(f.eval(xi)) > 1e-10) return false;
  }
  return true;
}

void criterion_1() {
  Timer tm;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int checked = 0, agreed = 0, constructed_null_ok = 0;
  // 150 random + 50 constructed-null per rank (200 forms per rank)
  for (int trial = 0; trial < 150; ++trial) {
    Mat3 raw;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) raw(a, b) = U(rng);
    MultilinearForm f2 = MultilinearForm::rank2(raw);
    ++checked;
    if (is_null(f2).null == oracle_null(f2)) ++agreed;
    Rank3 q{};
    for (auto& a : q)
      for (auto& b : a)
        for (double& x : b) x = U(rng);
    MultilinearForm f3 = MultilinearForm::rank3(q);
    ++checked;
    if (is_null(f3).null == oracle_null(f3)) ++agreed;
  }
  Mat3 mk = Mat3::minkowski();
  for (int trial = 0; trial < 50; ++trial) {
    // every symmetric null rank-2 form is a multiple of the metric
    double lam = U(rng) + (U(rng) > 0 ? 1.5 : -1.5);
    Mat3 raw;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) raw(a, b) = lam * mk(a, b);
    MultilinearForm f2 = MultilinearForm::rank2(raw);
    ++checked;
    if (is_null(f2).null == oracle_null(f2)) ++agreed;
    if (is_null(f2).null) ++constructed_null_ok;
    // rank-3 nulls: symmetrizations of (linear factor) x (metric)
    Rank1 ell = {U(rng), U(rng), U(rng)};
    Rank3 q{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int g = 0; g < 3; ++g) q[a][b][g] = ell[a] * mk(b, g);
    MultilinearForm f3 = MultilinearForm::rank3(q);
    ++checked;
    if (is_null(f3).null == oracle_null(f3)) ++agreed;
    if (is_null(f3).null) ++constructed_null_ok;
  }
  double dt = tm.seconds();
  bool pass = agreed == checked && constructed_null_ok == 100 && dt < 1.0;
  verdict(1, pass, false,
          fmt("null classifier vs 1000-angle oracle: %d/%d agree, "
              "100 constructed nulls recognized: %d/100, %.2f s",
              agreed, checked, constructed_null_ok, dt));
}

// ---- criterion 2: frame transition algebra ---------------------------------

void criterion_2() {
  Timer tm;
  std::vector<ConePoint> pts = random_cone_points(10000, 4242, 0.02, 1.2, 80.0);
  double worst_inv = 0.0, worst_metric = 0.0;
  Mat3 id = Mat3::identity();
  for (const ConePoint& p : pts)
    for (FrameKind k : {FrameKind::semi, FrameKind::hyperbolic}) {
      FrameMatrices fr = frame_at(p, k);
      worst_inv =
          std::max(worst_inv, mat_max_abs_diff(mat_mul(fr.phi, fr.psi), id));
      worst_metric = std::max(
          worst_metric, mat_max_abs_diff(metric_in_frame(p, k).upper,
                                         metric_by_contraction(p, k)));
    }
  double dt = tm.seconds();
  bool pass = worst_inv < 1e-12 && worst_metric < 1e-12 && dt < 1.0;
  verdict(2, pass, false,
          fmt("frame algebra at 10^4 cone points, both frames: "
              "max |Phi Psi - I| = %.2e, max metric mismatch = %.2e, %.2f s",
              worst_inv, worst_metric, dt));
}

// ---- criterion 3: identity verification suite ------------------------------

void criterion_3() {
  Timer tm;
  VerifySuiteResult suite = run_verify_suite({});
  double worst_analytic = 0.0, worst_ratio_lo = 4.0, worst_ratio_hi = 4.0;
  bool ok = suite.exit_code == exit_ok;
  for (const VerifyCheck& c : suite.checks) {
    ok = ok && c.pass && c.analytic < 1e-8;
    worst_analytic = std::max(worst_analytic, c.analytic);
    if (c.ratio != 0.0) {
      ok = ok && c.ratio > 3.0 && c.ratio < 5.0;
      worst_ratio_lo = std::min(worst_ratio_lo, c.ratio);
      worst_ratio_hi = std::max(worst_ratio_hi, c.ratio);
    }
  }
  // the suite runs the curved identity analytically only; close the gap
  CurvedMetricData hd = CurvedMetricData::zero();
  hd.h[0][0] = [](const PointJets& pj) {
    return 1e-2 * pj.st() * jet_exp(-pj.r2() * 0.125);
  };
  TestField f = test_field("gauss_trig");
  std::vector<ConePoint> pts = random_cone_points(60, 77, 0.10, 3.0, 20.0);
  double c1 =
      verify_conformal_identity_curved(f, hd, pts, DerivMode::fd(1e-2))
          .max_residual;
  double c2 =
      verify_conformal_identity_curved(f, hd, pts, DerivMode::fd(5e-3))
          .max_residual;
  double curved_ratio = c2 > 0 ? c1 / c2 : 0.0;
  ok = ok && curved_ratio > 3.0 && curved_ratio < 5.0;
  double dt = tm.seconds();
  verdict(3, ok && dt < 30.0, false,
          fmt("identity suite (%zu checks): max analytic residual %.2e, "
              "FD ratios in [%.3f, %.3f], curved FD ratio %.3f, %.1f s",
              suite.checks.size(), worst_analytic, worst_ratio_lo,
              worst_ratio_hi, curved_ratio, dt));
}

// ---- criterion 4: conformal energy conservation for the free wave ----------

// Smooth compact linear-wave data; kept independent of the nonlinear-run
// generator so the measured drift reflects the scheme, not a deliberately
// sharpened profile.
GridState linear_wave_data(const Grid& g) {
  GridState st;
  st.grid = g;
  st.t = 2.0;
  size_t N = (size_t)g.n * g.n;
  st.u.assign(N, 0.0);
  st.ut.assign(N, 0.0);
  st.v.assign(N, 0.0);
  st.vt.assign(N, 0.0);
  const double eps = 1e-3;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      double x = g.x(i), y = g.x(j), r2 = x * x + y * y;
      if (r2 >= 1.0) continue;
      double q = 1.0 - r2, p = q * q * q * q;
      st.u[st.idx(i, j)] = eps * p;
      st.ut[st.idx(i, j)] = 0.5 * eps * p * (1.0 + 0.3 * x);
    }
  return st;
}

double conformal_drift(double h) {
  Grid g = Grid::make(h, 20.0);
  g.require_fits(18.5);
  GridState init = linear_wave_data(g);
  CoefficientSet co;  // all couplings zero: box u = 0
  EvolveOptions opt;
  opt.evolve_v = false;
  std::vector<double> s_list = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  RunResult rr = run_and_sample(init, co, s_list, 18.5, opt);
  double e0 = 0.0, e1 = 0.0;
  for (HyperboloidSample& smp : rr.samples) {
    double e = energy_conformal(smp, 0).value;
    if (smp.s == 2.0) e0 = e;
    e1 = e;
    smp.records.clear();
    smp.records.shrink_to_fit();
  }
  return std::fabs(e1 - e0) / e0;
}

void criterion_4() {
  Timer tm;
  double d32 = conformal_drift(1.0 / 32);
  double d64 = conformal_drift(1.0 / 64);
  double shrink = d64 > 0 ? d32 / d64 : 0.0;
  bool pass = d32 <= 0.02 && shrink >= 3.0;
  verdict(4, pass, false,
          fmt("conformal energy of a free wave over s in [2,6]: drift %.3e "
              "at h=1/32 (<= 2e-2), %.3e at h=1/64 (shrink %.2fx >= 3), "
              "%.0f s",
              d32, d64, shrink, tm.seconds()));
}

// ---- criterion 5: normal-form residual convergence -------------------------

TestField nf_field(double amp) {
  return TestField{"nf_gauss_sin", [amp](const PointJets& pj) {
                     return amp *
                            jet_exp(-(pj.x1 * pj.x1 + pj.x2 * pj.x2)) *
                            jet_sin(pj.t);
                   }};
}

void criterion_5() {
  Timer tm;
  std::vector<ConePoint> block;
  block.push_back(ConePoint::in_cone(3.0, 0.4, -0.3));
  block.push_back(ConePoint::in_cone(4.0, 1.0, 0.8));
  block.push_back(ConePoint::in_cone(5.0, -0.5, 2.0));
  block.push_back(ConePoint::in_cone(3.5, 0.0, 0.0));
  block.push_back(ConePoint::in_cone(6.0, -2.0, 1.5));

  NormalFormConstants k;  // generic small constants, every block populated
  k.c = 1.3;
  k.R = 0.15;
  k.h0(0, 0) = 0.08;
  k.h0(0, 1) = k.h0(1, 0) = -0.05;
  k.h0(2, 2) = 0.06;
  k.h1[0][0][0] = 0.04;
  k.h1[1][1][0] = 0.05;
  k.h1[2][0][1] = 0.02;
  k.A(0, 0) = 0.2;
  k.A(1, 1) = -0.1;
  k.B = {0.1, -0.06, 0.04};

  TestField v = nf_field(0.3);
  const double h = 0.05;
  double analytic = residual_sup_analytic(v, k, block);
  NormalFormResidual generic = residual_check(v, k, block, h);

  NormalFormConstants z;  // couplings off, mass kept: bare Klein-Gordon
  z.c = k.c;
  double analytic0 = residual_sup_analytic(v, z, block);
  NormalFormResidual zero = residual_check(v, z, block, h);
  // running the generic constants scaled by zero through the full quadratic
  // machinery must land on the bare-operator residual bit for bit
  NormalFormConstants k0 = k;
  k0.R = 0.0;
  k0.B = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      k0.h0(i, j) = 0.0;
      k0.A(i, j) = 0.0;
      for (int l = 0; l < 3; ++l) k0.h1[i][j][l] = 0.0;
    }
  NormalFormResidual scaled = residual_check(v, k0, block, h);
  bool collapse = zero.residual_inf == scaled.residual_inf &&
                  zero.norm_R1 == 0.0 && zero.norm_R2 == 0.0 &&
                  zero.norm_R3 == 0.0 && analytic0 < 1e-14;

  double dt = tm.seconds();
  bool pass = analytic < 1e-8 && generic.ratio > 3.0 && generic.ratio < 5.0 &&
              zero.ratio > 3.0 && zero.ratio < 5.0 && collapse && dt < 60.0;
  verdict(5, pass, false,
          fmt("normal-form residual: analytic %.2e, FD ratio %.3f (generic) "
              "/ %.3f (zero constants, pure truncation %.2e), %.1f s",
              analytic, generic.ratio, zero.ratio, zero.residual_inf, dt));
}

// ---- criterion 6: modified-energy equivalence ------------------------------

void criterion_6() {
  Timer tm;
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto rnd = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  int sets_ok = 0, q0_ok = 0;
  double ratio_lo = 1e9, ratio_hi = 0.0;
  const int n_sets = 100;
  for (int set = 0; set < n_sets; ++set) {
    int nf = 2 + set % 2;
    std::vector<TestField> v;
    for (int i = 0; i < nf; ++i) {
      double amp = rnd(0.01, 0.04), w = rnd(0.6, 1.4), f = rnd(0.8, 1.6);
      double a = rnd(-0.5, 0.5), b = rnd(-0.5, 0.5), ph = rnd(0.0, 6.28);
      v.push_back(TestField{
          "random", [=](const PointJets& pj) {
            Jet dx = pj.x1 - a, dy = pj.x2 - b;
            return amp * jet_exp(-w * (dx * dx + dy * dy)) *
                   jet_sin(f * pj.t + ph);
          }});
    }
    std::vector<Mat3> Q(nf);
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j)
        for (int l = j; l < nf; ++l) {
          double q = rnd(-0.08, 0.08);
          Q[i](j, l) = Q[i](l, j) = q;
        }
    double c = rnd(0.8, 1.5);
    ModifiedEnergyData e = modified_energy(v, Q, c, 2.0, 1.0 / 32);
    ratio_lo = std::min(ratio_lo, e.ratio);
    ratio_hi = std::max(ratio_hi, e.ratio);
    if (e.smallness <= 0.1 && e.ratio >= 0.25 && e.ratio <= 4.0) ++sets_ok;
    ModifiedEnergyData e0 =
        modified_energy(v, std::vector<Mat3>(nf), c, 2.0, 1.0 / 32);
    if (std::fabs(e0.ratio - 1.0) < 1e-12) ++q0_ok;
  }
  double dt = tm.seconds();
  bool pass = sets_ok == n_sets && q0_ok == n_sets && dt < 60.0;
  verdict(6, pass, false,
          fmt("modified-energy equivalence on %d random sets: ratios in "
              "[%.4f, %.4f] (band [0.25, 4]), Q=0 collapse %d/%d, %.1f s",
              n_sets, ratio_lo, ratio_hi, q0_ok, n_sets, dt));
}

// ---- criterion 7: manufactured-solution convergence of the solver ----------

double mms_u(double t, double x1, double x2) {
  return 0.1 * std::sin(1.3 * t + 0.7 * x1) * std::cos(0.6 * x2);
}
double mms_v(double t, double x1, double x2) {
  return 0.1 * std::cos(1.1 * t + 0.5 * x2) * std::cos(0.4 * x1);
}
FirstOrder mms_u_jet(double t, double x1, double x2, Mat3& dd) {
  double S = std::sin(1.3 * t + 0.7 * x1), C = std::cos(1.3 * t + 0.7 * x1);
  double c2 = std::cos(0.6 * x2), s2 = std::sin(0.6 * x2);
  FirstOrder f;
  f.u = 0.1 * S * c2;
  f.du = {0.13 * C * c2, 0.07 * C * c2, -0.06 * S * s2};
  dd(0, 0) = -0.1 * 1.69 * S * c2;
  dd(0, 1) = dd(1, 0) = -0.1 * 0.91 * S * c2;
  dd(0, 2) = dd(2, 0) = -0.1 * 0.78 * C * s2;
  dd(1, 1) = -0.1 * 0.49 * S * c2;
  dd(1, 2) = dd(2, 1) = -0.1 * 0.42 * C * s2;
  dd(2, 2) = -0.1 * 0.36 * S * c2;
  return f;
}
FirstOrder mms_v_jet(double t, double x1, double x2, Mat3& dd) {
  double C = std::cos(1.1 * t + 0.5 * x2), S = std::sin(1.1 * t + 0.5 * x2);
  double c1 = std::cos(0.4 * x1), s1 = std::sin(0.4 * x1);
  FirstOrder f;
  f.u = 0.1 * C * c1;
  f.du = {-0.11 * S * c1, -0.04 * C * s1, -0.05 * S * c1};
  dd(0, 0) = -0.1 * 1.21 * C * c1;
  dd(0, 1) = dd(1, 0) = 0.1 * 0.44 * S * s1;
  dd(0, 2) = dd(2, 0) = -0.1 * 0.55 * C * c1;
  dd(1, 1) = -0.1 * 0.16 * C * c1;
  dd(1, 2) = dd(2, 1) = 0.1 * 0.2 * S * s1;
  dd(2, 2) = -0.1 * 0.25 * C * c1;
  return f;
}

// separate sup errors for the wave and KG components after 0.5 time units
void mms_errors(const CoefficientSet& co, double h, double& eu, double& ev) {
  Grid g = Grid::make(h, 1.0);
  EvolveOptions opt;
  opt.truncate_support = false;
  opt.force_u = [co](double t, double x1, double x2) {
    Mat3 ddu, ddv;
    FirstOrder U = mms_u_jet(t, x1, x2, ddu);
    FirstOrder V = mms_v_jet(t, x1, x2, ddv);
    return ddu(0, 0) - ddu(1, 1) - ddu(2, 2) - rhs_wave(co, U, V, ddu);
  };
  opt.force_v = [co](double t, double x1, double x2) {
    Mat3 ddu, ddv;
    FirstOrder U = mms_u_jet(t, x1, x2, ddu);
    FirstOrder V = mms_v_jet(t, x1, x2, ddv);
    return ddv(0, 0) - ddv(1, 1) - ddv(2, 2) + co.c * co.c * V.u -
           rhs_kg(co, U, V, ddv);
  };
  opt.exact_u = mms_u;
  opt.exact_v = mms_v;
  opt.exact_ut = [](double t, double x1, double x2) {
    Mat3 dd;
    return mms_u_jet(t, x1, x2, dd).du[0];
  };
  opt.exact_vt = [](double t, double x1, double x2) {
    Mat3 dd;
    return mms_v_jet(t, x1, x2, dd).du[0];
  };
  GridState s;
  s.grid = g;
  s.t = 2.0;
  size_t N = (size_t)g.n * g.n;
  s.u.resize(N);
  s.ut.resize(N);
  s.v.resize(N);
  s.vt.resize(N);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      Mat3 dd;
      s.u[s.idx(i, j)] = mms_u(2.0, g.x(i), g.x(j));
      s.ut[s.idx(i, j)] = mms_u_jet(2.0, g.x(i), g.x(j), dd).du[0];
      s.v[s.idx(i, j)] = mms_v(2.0, g.x(i), g.x(j));
      s.vt[s.idx(i, j)] = mms_v_jet(2.0, g.x(i), g.x(j), dd).du[0];
    }
  int steps = (int)std::lround(0.5 / g.dt);
  for (int k = 0; k < steps; ++k) s = step(s, co, g.dt, opt);
  eu = ev = 0.0;
  for (int i = 1; i < g.n - 1; ++i)
    for (int j = 1; j < g.n - 1; ++j) {
      size_t c = s.idx(i, j);
      eu = std::max(eu, std::fabs(s.u[c] - mms_u(s.t, g.x(i), g.x(j))));
      ev = std::max(ev, std::fabs(s.v[c] - mms_v(s.t, g.x(i), g.x(j))));
    }
}

void criterion_7() {
  Timer tm;
  CoefficientSet co;  // one coupling from each family, both equations fed
  co.P1[0][0][0] = 0.1;
  co.A1(0, 0) = 0.5;
  co.A5(0, 0) = 0.4;
  co.B1(0, 1) = 0.2;
  co.B3(1, 1) = 0.2;
  co.K1 = 0.3;
  co.K2 = 0.2;
  double eu8, ev8, eu16, ev16, eu32, ev32;
  mms_errors(co, 1.0 / 8, eu8, ev8);
  mms_errors(co, 1.0 / 16, eu16, ev16);
  mms_errors(co, 1.0 / 32, eu32, ev32);
  double pu = std::log2(eu16 / eu32), pv = std::log2(ev16 / ev32);
  bool pass = std::fabs(pu - 2.0) <= 0.2 && std::fabs(pv - 2.0) <= 0.2 &&
              eu8 > eu16 && ev8 > ev16;
  verdict(7, pass, false,
          fmt("manufactured-solution order (h = 1/8, 1/16, 1/32, P/A/B/K "
              "all active): wave %.3f, KG %.3f (2.0 +- 0.2), %.1f s",
              pu, pv, tm.seconds()));
}

// ---- criteria 8 and 9: scaled nonlinear runs -------------------------------

// Admissible system: null P1 (cone cubic) and null A1 (metric multiple),
// plus genuinely nonzero A4, B3, K2.
CoefficientSet admissible_coefficients() {
  CoefficientSet co;
  const double q = 0.05;
  co.P1[0][0][0] = q;
  co.P1[0][1][1] = co.P1[1][0][1] = co.P1[1][1][0] = -q / 3.0;
  co.P1[0][2][2] = co.P1[2][0][2] = co.P1[2][2][0] = -q / 3.0;
  Mat3 mk = Mat3::minkowski();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) co.A1(a, b) = 0.05 * mk(a, b);
  co.A4[0] = 0.5;
  co.B3(1, 1) = 0.3;
  co.K2 = 0.2;
  return co;
}

void criterion_8() {
  Timer tm;
  CoefficientSet co = admissible_coefficients();
  ClassificationReport rep = theorem1_admissible(co);
  if (!rep.theorem1_admissible) {
    verdict(8, false, false, "coefficient set unexpectedly inadmissible");
    return;
  }
  const double h = 1.0 / 32;
  Grid g = Grid::make(h, 20.0);
  g.require_fits(18.5);
  GridState init = make_initial_data(g, 1e-3, "polynomial-bump", 1);
  std::vector<double> s_list;
  for (double s = 2.0; s <= 6.0 + 1e-9; s += 0.25) s_list.push_back(s);
  RunResult rr = run_and_sample(init, co, s_list, 18.5);

  EnergySeries series;
  for (HyperboloidSample& smp : rr.samples) {
    DerivativeTower tower = build_tower(smp, co, g.h);
    EnergyRecord row;
    row.s = smp.s;
    for (int k = 0; k < 3; ++k) {
      row.E_std_u[k] = energy_standard_tower(tower, k, 0.0, 0);
      row.E_std_v[k] = energy_standard_tower(tower, k, co.c, 1);
    }
    row.E_con = energy_conformal(smp, 0).value;
    series.rows.push_back(row);
    smp.records.clear();
    smp.records.shrink_to_fit();
  }

  // Interior rays: the hyperboloids above only reach t = 6 at r = 0, and
  // the Klein-Gordon transit has not fully left the origin by then.  A
  // small companion evolution of the same data on the same lattice (the
  // center ray depends only on the data in its domain of dependence)
  // records r = 0 densely out to t = 8.
  std::vector<RaySample> center_u, center_v;
  {
    Grid g2 = Grid::make(h, 8.5);
    g2.require_fits(8.0);
    GridState st = make_initial_data(g2, 1e-3, "polynomial-bump", 1);
    int ic = g2.index_of(0.0);
    size_t cc = st.idx(ic, ic);
    while (st.t < 8.0 - 1e-12) {
      st = step(st, co, g2.dt);
      double tau = st.t - 2.0;
      center_u.push_back({tau, 0.0, st.u[cc]});
      double kg = std::sqrt(st.v[cc] * st.v[cc] +
                            (st.vt[cc] / co.c) * (st.vt[cc] / co.c));
      center_v.push_back({tau, 0.0, kg});
    }
  }
  double high0 =
      std::sqrt(series.rows.front().E_std_u[2] + series.rows.front().E_std_v[2]);
  BootstrapVerdict boot = bootstrap_monitor(series, 0.01, 2.0 * high0);

  // interior fits in elapsed time, late two thirds of the ray
  auto late_fit = [](std::vector<RaySample> pts) {
    double tau_max = 0;
    for (const RaySample& p : pts) tau_max = std::max(tau_max, p.t);
    std::vector<RaySample> late;
    for (const RaySample& p : pts)
      if (p.t >= tau_max / 3.0) late.push_back(p);
    return fit_decay(late, DecayModel::interior);
  };
  DecayFit fu = late_fit(center_u), fv = late_fit(center_v);
  bool fits_ok = fu.b >= -1.2 && fu.b <= -0.7 && fv.b >= -1.2 && fv.b <= -0.7;
  bool pass = boot.pass && fits_ok;
  verdict(8, pass, false,
          fmt("scaled admissible run (h=1/32, eps=1e-3): bootstrap %s "
              "(margin %.3f, budget 2x initial over s in [2,6]), interior "
              "exponents wave %.3f / KG %.3f (band [-1.2, -0.7]), %.0f s",
              boot.pass ? "holds" : "violated", boot.min_margin, fu.b, fv.b,
              tm.seconds()));
}

void criterion_9() {
  Timer tm;
  RunConfig weak;
  weak.coeffs = admissible_coefficients();
  weak.grid.h = 1.0 / 16;
  weak.grid.L = 20.0;
  weak.run.epsilon = 1e-3;
  weak.run.s_list.clear();
  for (double s = 2.0; s <= 6.0 + 1e-9; s += 0.25)
    weak.run.s_list.push_back(s);

  RunConfig strong = weak;
  strong.coeffs.B2[0] = 0.1;  // pure-KG source into the wave equation

  SimulateResult rw = run_simulation(weak, false);
  SimulateResult rs = run_simulation(strong, true);
  bool ran = rw.exit_code == exit_ok && rs.exit_code == exit_ok &&
             rs.exploratory && rw.near_cone_gradient.available &&
             rs.near_cone_gradient.available;
  double bw = rw.near_cone_gradient.fit.b, bs = rs.near_cone_gradient.fit.b;
  bool pass = ran && bs - bw >= 0.3;
  verdict(9, pass, true,
          ran ? fmt("strong-vs-weak near-cone gradient decay (h=1/16, "
                    "exploratory): weak %.3f, strong %.3f, contrast %.3f "
                    "(soft target >= 0.3), %.0f s",
                    bw, bs, bs - bw, tm.seconds())
              : "runs did not both complete with a near-cone fit");
}

// ---- criterion 10: bit-identical reruns ------------------------------------

void criterion_10() {
  Timer tm;
  RunConfig cfg = parse_config(R"([coefficients]
c = 1.0
A4.0 = 0.5
B3.11 = 0.3
K2 = 0.2

[grid]
h = 0.125
L = 8.0

[run]
epsilon = 1e-3
s_list = 2.0, 2.2, 2.4, 2.6, 2.8, 3.0, 3.2, 3.4
)");
  SimulateResult a = run_simulation(cfg, false);
  SimulateResult b = run_simulation(cfg, false);
  bool pass = a.exit_code == exit_ok && a.csv == b.csv && a.json == b.json &&
              !a.csv.empty() && !a.json.empty();
  verdict(10, pass, false,
          fmt("repeated simulation, identical config: CSV %s, JSON %s, "
              "%.1f s",
              a.csv == b.csv ? "bit-identical" : "DIFFERS",
              a.json == b.json ? "bit-identical" : "DIFFERS", tm.seconds()));
}

}  // namespace

// With no arguments every criterion runs in order; numeric arguments
// restrict to that subset (debugging aid, the gate is the full run).
int main(int argc, char** argv) {
  void (*crit[10])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                        criterion_5, criterion_6, criterion_7, criterion_8,
                        criterion_9, criterion_10};
  if (argc > 1) {
    for (int a = 1; a < argc; ++a) {
      int n = std::atoi(argv[a]);
      if (n >= 1 && n <= 10) crit[n - 1]();
    }
  } else {
    for (auto f : crit) f();
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
