#pragma once
// Energy functionals on hyperboloid slices, the conformal-energy running
// integral, the global Sobolev ratio, decay-exponent fits, and the
// bootstrap monitor.  All L^2(H_s) integrals use the flat dx measure over
// the disc H*_s; quadrature is the plain h^2-weighted sum (the integrands
// of interest vanish toward the rim of the disc).

#include <string>
#include <vector>

#include "wkg/tower.hpp"

namespace wkg {

// ---- energies ---------------------------------------------------------------

// int over H*_s of  e_c[w] = |dt w|^2 + sum_a |d_a w|^2
//                          + 2 (x^a/t) dt w d_a w + c^2 w^2.
// The equivalent form sum_a |under_a w|^2 + |(s/t) dt w|^2 + c^2 w^2 is
// evaluated alongside and pointwise agreement within 1e-12 is enforced.
// field: 0 = u, 1 = v.
double energy_standard(const HyperboloidSample& sample, double c, int field);

// Vector-field energy sum_{|I|+|J| <= order} E_c(s, d^I L^J w) from a
// tower; points whose reconstruction order is too low for a word are
// excluded from that word's quadrature (two rings at most).
double energy_standard_tower(const DerivativeTower& tower, int order,
                             double c, int field);

struct ConformalEnergy {
  double value = 0.0;
  std::vector<double> ku_plus_u;  // (Kw + w) per sample record
};
// int over H*_s of  (Kw + w)^2 + sum_a |s under_a w|^2,
// K w = s (s/t) dt w + 2 x^a under_a w.
ConformalEnergy energy_conformal(const HyperboloidSample& sample, int field);

// ||(s/t) w||_{L^2(H*_s)}
double norm_st(const HyperboloidSample& sample, int field);
// max over alpha of ||s (s/t)^2 d_alpha w||_{L^2(H*_s)}
double norm_s_st2_grad(const HyperboloidSample& sample, int field);

// ---- series -----------------------------------------------------------------

struct EnergyRecord {
  double s = 0;
  double E_std_u[3] = {}, E_std_v[3] = {};  // cumulative orders 0, 1, 2
  double E_con = 0;                         // conformal energy of u
  double Fcon = 0;                          // filled by fcon_accumulate
  double sobolev_ratio = 0;
  double norm_st_u = 0;
  double norm_s_st2_du = 0;
};

struct EnergySeries {
  std::vector<EnergyRecord> rows;
  void validate() const;  // s strictly increasing, finite entries
};

// F_c(s0; s) = ||(s/t)u||_{L^2(H_{s0})} + E_con(s)^{1/2}
//            + int_{s0}^{s} s'^{-1} E_con(s')^{1/2} ds'   (trapezoid).
// Fills row.Fcon for every row; initial_norm is ||(s/t)u|| at the first s.
void fcon_accumulate(EnergySeries& series, double initial_norm);

// sup over grid points of |t^{-1} w|^2 divided by
// sum_{|I|+|J| <= 2} ||d^I L^J w||^2_{L^2(H_s)}; 0 for a zero field.
struct SobolevRatio {
  double ratio = 0;
  double x1 = 0, x2 = 0;  // location of the sup
};
SobolevRatio sobolev_ratio(const DerivativeTower& tower, int field);

// ---- decay fits -------------------------------------------------------------

struct RaySample {
  double t = 0, r = 0, value = 0;
};

enum class DecayModel { interior, two_factor };

struct DecayFit {
  double a = 0;         // exponent of (1 + |t - r|); 0 for interior model
  double b = 0;         // exponent of t
  double residual = 0;  // rms of the log-space fit
  int points_used = 0;
};

// Least squares of log|value| against the model basis.  Sign changes are
// handled by fitting the envelope of |value| local maxima; fewer than 8
// usable points is an error.
DecayFit fit_decay(const std::vector<RaySample>& samples, DecayModel model);

// ---- bootstrap monitor ------------------------------------------------------

struct BootstrapVerdict {
  bool pass = true;
  double first_violation_s = 0;
  std::string which;       // "high", "low", or "conformal"
  double min_margin = 0;   // min over rows of (bound - value) / bound
};

// Checks, per row: (E_std_u[2] + E_std_v[2])^{1/2} <= budget * s^delta,
// (E_std_u[0] + E_std_v[0])^{1/2} <= budget, E_con^{1/2} <= budget * s^delta.
BootstrapVerdict bootstrap_monitor(const EnergySeries& series, double delta,
                                   double budget);

// Monotonicity monitor: ||(s/t)u||(s1) <= ||(s/t)u||(s0)
//                       + C int s^{-1} E_con^{1/2}; returns the defect of
// the worst row (negative when the bound holds everywhere).
double weighted_norm_growth_defect(const EnergySeries& series, double C);

// Measured constants ||(s/t)u|| / F_c and ||s(s/t)^2 du|| / F_c (maxima
// over rows with Fcon > 0).
struct FconConstants {
  double c_weighted = 0, c_gradient = 0;
};
FconConstants fcon_constants(const EnergySeries& series);

// ---- emission ---------------------------------------------------------------

// Fixed column order:
// s,E_std_u_0,E_std_u_1,E_std_u_2,E_std_v_0,E_std_v_1,E_std_v_2,
// E_con,Fcon,sobolev_ratio,norm_st_u,norm_s_st2_du
// Values printed with %.17g; deterministic for identical input.
std::string series_csv(const EnergySeries& series);

}  // namespace wkg
