#pragma once
// Numerical verification of the differential identities: D'Alembertian
// decomposition in the semi-hyperboloidal frame, commutator relations,
// and the flat/curved conformal multiplier identity.  All checks run in
// two modes: analytic derivatives (jets; residual at round-off) and
// centered finite differences (residual convergent at 2nd order).

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wkg/geometry.hpp"

namespace wkg {

// A closed-form scalar field given as a jet expression; the plain value
// function is derived from it and used by the finite-difference mode.
struct TestField {
  std::string name;
  std::function<Jet(const PointJets&)> fn;
  double value(double t, double x1, double x2) const;
};

// Library: Gaussian-in-x times trig-in-t, polynomial bumps, homogeneous
// t^k * angular, plus the degenerate cases used by the worked examples.
std::vector<TestField> test_field_library();
TestField test_field(const std::string& name);

// Provider of the field's jet at a point (used by the derivative tower and
// by the self-checks); fd_provider fills Taylor coefficients through total
// order 2 from centered differences.
using JetProvider = std::function<Jet(const ConePoint&)>;
JetProvider analytic_provider(const TestField& f);
JetProvider fd_provider(const TestField& f, double h);

// How an identity check obtains derivatives.  Analytic mode uses jets and
// leaves only round-off.  FD mode applies every differential operator as a
// nested centered stencil of step h on the plain value function, so the
// truncation errors of the two sides differ and the residual converges at
// 2nd order.  (Building a jet from finite differences and running the jet
// arithmetic would NOT do: the identities are algebraic in the Taylor
// coefficients and hold exactly for any coefficient values.)
struct DerivMode {
  bool analytic = true;
  double h = 1e-2;
  static DerivMode exact() { return {true, 0.0}; }
  static DerivMode fd(double h) { return {false, h}; }
};

// ---- identity checks --------------------------------------------------------

// |box u - [(s/t)^2 dt dt u + (2x^a/t) dt under_a u - sum_a under_a under_a u
//           + t^{-1}(2 + (r/t)^2) dt u]|, box = dt^2 - laplace.
// corrupt_sign flips the lower-order term's sign (fault-injection hook:
// the corrupted residual must be caught, not pass).
double verify_box_decomposition(const TestField& f,
                                const std::vector<ConePoint>& points,
                                DerivMode mode = DerivMode::exact(),
                                bool corrupt_sign = false);

// Five commutator/Hessian identities, keyed by short names:
//   boost_dt   : [L_a, d_t]u = -d_a u
//   boost_dx   : [L_a, d_b]u = -delta_ab d_t u
//   boost_boost: [L_1, L_2]u = (x1/t)L_2 u - (x2/t)L_1 u
//   hessian_ta : d_t d_a u = -(x^a/t) d_t d_t u
//                + t^{-1}(d_t L_a - under_a + (x^a/t) d_t)u
//   hessian_ab : d_a d_b u = (x^a x^b/t^2) d_t d_t u
//                + t^{-1}(d_a L_b - (x^b/t) d_t L_a + (x^b/t) under_a
//                         - delta_ab d_t - (x^a x^b/t^2) d_t)u
std::map<std::string, double> verify_commutators(
    const TestField& f, const std::vector<ConePoint>& points,
    DerivMode mode = DerivMode::exact());

// Residual of s(Ku+u) box u = (1/2) dbar_s(|Ku+u|^2 + s^2 sum|under_a u|^2)
//                             + under_a(w_m^a).
double verify_conformal_identity_flat(const TestField& f,
                                      const std::vector<ConePoint>& points,
                                      DerivMode mode = DerivMode::exact());

// Curved perturbation g = m + h, components h^{alpha beta} as jet
// expressions (upper Cartesian indices, symmetric).
struct CurvedMetricData {
  std::array<std::array<std::function<Jet(const PointJets&)>, 3>, 3> h;
  static CurvedMetricData zero();
};

struct CurvedIdentityReport {
  double max_residual = 0.0;
  // suprema of the named pieces over the sample cloud
  double max_N_minus_1 = 0.0;
  double max_R_term = 0.0;
  double max_S_term = 0.0;
  double max_T_term = 0.0;
};

// Residual of the curved multiplier identity; at h = 0 this is the exact
// code path of the flat check (verify_conformal_identity_flat delegates
// here with a zero perturbation).
CurvedIdentityReport verify_conformal_identity_curved(
    const TestField& f, const CurvedMetricData& hdata,
    const std::vector<ConePoint>& points,
    DerivMode mode = DerivMode::exact());

// ---- inequality monitors ----------------------------------------------------
// These never assert paper constants: the measured constant is reported and
// compared across refinements by the caller.

struct HessianSample {
  double t = 0, s = 0;
  double abs_dd = 0;      // sup over second partials |d d u|
  double abs_box = 0;     // |box u|_{0,0}
  double abs_du_11 = 0;   // |d u|_{1,1}
};
// C = sup (s/t)^2 |dd u| / (|box u| + t^{-1}|du|_{1,1} + floor)
double monitor_hessian_bound(const std::vector<HessianSample>& samples,
                             double floor = 1e-14);

struct KgFastSample {
  double t = 0, s = 0;
  double abs_v = 0;
  double abs_dv_11 = 0;   // |dv|_{1,1}
  double abs_f = 0;       // source F_2 magnitude
};
double monitor_kg_fast_decay(const std::vector<KgFastSample>& samples,
                             double c, double floor = 1e-14);

// ---- reporting --------------------------------------------------------------

struct IdentityReport {
  double max_residual_analytic = 0.0;
  double max_residual_fd_h = 0.0;
  double max_residual_fd_h2 = 0.0;
  double ratio = 0.0;  // fd_h / fd_h2, ~4 at 2nd order
};

// Runs one identity in all three modes.  `which` is one of
// box | conformal_flat | commutators (worst identity of the five).
IdentityReport identity_report(const std::string& which, const TestField& f,
                               const std::vector<ConePoint>& points,
                               double h_fd);

}  // namespace wkg
