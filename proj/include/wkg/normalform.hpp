#pragma once
// Quadratic normal-form transform for the scalar quasilinear Klein-Gordon
// equation and the modified (quadratic-corrected) energy for systems with
// dt v * dt v couplings.  The transformed unknown w = v + a v dt v + b v^2
// removes every quadratic term except dt w dt w; the residual of the
// transformed equation and the divergence identity of the modified energy
// density are both checkable on manufactured fields, analytically (jets)
// and by nested centered differences (2nd-order convergent residual).

#include <functional>
#include <string>
#include <vector>

#include "wkg/forms.hpp"
#include "wkg/verify.hpp"

namespace wkg {

// Constant coefficients of the scalar model
//   box v + c^2 v = -(h0^{ab} v + h1^{abg} d_g v) d_a d_b v
//                   + A^{ab} d_a v d_b v + B^a v d_a v + R v^2 + R0.
struct NormalFormConstants {
  Mat3 h0;
  Rank3 h1{};
  Mat3 A;
  Rank1 B{};
  double R = 0.0;
  double c = 1.0;

  void validate() const;  // finite entries, c > 0
};

// Transform coefficients at a point:
//   a = (1/3c^2) (B_under^0 + c^2 (t/s)^2 h1_under^{000}),
//   b = (1/c^2)  (R + c^2 (t/s)^2 h0_under^{00}).
struct AbPair {
  double a = 0.0, b = 0.0;
};
AbPair compute_ab(const NormalFormConstants& k, const ConePoint& p);

// Restriction of v to a slice: values and time derivative per point.
struct SliceField {
  std::vector<ConePoint> pts;
  std::vector<double> v, vt;
};

struct TransformFields {
  std::vector<double> a, b, w, h;  // per point; h is the divisor h[a,v]
  double max_abs_h = 0.0;
  double margin = 0.5;  // 1/2 - max|h|, invertibility margin of (1 + h)
};

// Throws when the standing smallness |h[a,v]| <= 1/2 fails (with the worst
// location in the message).
TransformFields transform(const SliceField& f, const NormalFormConstants& k);

// ---- residual of the transformed equation -----------------------------------

// R0 is defined by back-substitution of the manufactured field, so the
// starting equation holds identically and the whole identity chain is
// testable without a solver.  The residual
//   rho = box w + c^2 w - (2(s/t)^2 b + A_under^{00}) dt w dt w - Rem,
//   Rem = Rem3 + (1 + h[a,v])^{-1} (R0 + Rem2 + Rem1),
// vanishes identically for the exact derivatives; with nested centered
// stencils it converges to zero at 2nd order.
struct NormalFormResidual {
  double h = 0.0;            // coarse stencil step
  double residual_inf = 0.0, residual_inf_half = 0.0;
  double residual_l2 = 0.0, residual_l2_half = 0.0;
  double ratio = 0.0;        // inf norms, coarse / fine, ~4
  // sup norms of the sub-remainders at the coarse step
  double norm_R0 = 0.0, norm_R1 = 0.0, norm_R2 = 0.0, norm_R3 = 0.0;
  double norm_R = 0.0;
  std::string json() const;  // fixed key order, %.17g values
};

NormalFormResidual residual_check(const TestField& v,
                                  const NormalFormConstants& k,
                                  const std::vector<ConePoint>& block,
                                  double h);

// Exact-derivative evaluation of the same residual (round-off only); the
// instrument behind the convergence claim.
double residual_sup_analytic(const TestField& v, const NormalFormConstants& k,
                             const std::vector<ConePoint>& block);

// ---- modified energy --------------------------------------------------------

// System box v_i + c^2 v_i = F_i, F_i = Q_i^{jk} dt v_j dt v_k + R_i with
// constant symmetric couplings Q_i^{jk} (N <= 3 fields, Q[i](j,k)).
// P_i^{jk} = -Q_i^{jk}/3 exactly; w_i = v_i + P_i^{jk} (t/s)^2 v_j v_k;
//   V^0_i  = (1/2) sum_alpha |d_alpha w_i|^2 + (1/2) c^2 w_i^2
//            + P_i^{jk} (t/s)^2 v_i (dt v_j dt v_k + sum_a d_a v_j d_a v_k
//                                    + c^2 v_j v_k),
//   -V^a_i = dt w_i d_a w_i + P_i^{jk} (t/s)^2 v_i (dt v_j d_a v_k
//                                                   + dt v_k d_a v_j),
//   e_{Q,c} = 2 sum_i (V^0_i - (x^a/t) V^a_i).
struct ModifiedEnergyData {
  int n_fields = 0;
  std::vector<double> E_std;   // int e_c[v_i] per field (same quadrature)
  double E_sum = 0.0;          // sum of E_std
  double E_Qc = 0.0;           // int e_{Q,c}
  double ratio = 0.0;          // E_Qc / E_sum (0 when E_sum = 0)
  double smallness = 0.0;      // measured sup of the (t/s)^2 Q v gate
};

// Integral over the disc H*_s (flat h^2-weighted sum).  The smallness gate
// sup |(t/s)^2 Q_i^{jk} v_i| + |...v_j| + |...v_k| <= eps_s is a hard
// error (Q is constant, so the gradient gate holds trivially).
ModifiedEnergyData modified_energy(const std::vector<TestField>& v,
                                   const std::vector<Mat3>& Q, double c,
                                   double s, double h, double eps_s = 0.1);

// Pointwise residual of  dt V^0_i + d_a V^a_i = S^(1)_i + S^(2)_i  with
// F_i = box v_i + c^2 v_i and R_i = F_i - Q_i^{jk} dt v_j dt v_k obtained
// from the manufactured fields.  Finite differences at h and h/2.
struct ModifiedIdentityResidual {
  double h = 0.0;
  double residual_inf = 0.0, residual_inf_half = 0.0;
  double ratio = 0.0;  // ~4
};
ModifiedIdentityResidual modified_identity_check(
    const std::vector<TestField>& v, const std::vector<Mat3>& Q, double c,
    const std::vector<ConePoint>& block, double h);

// Exact-derivative counterpart (round-off only).
double modified_identity_sup_analytic(const std::vector<TestField>& v,
                                      const std::vector<Mat3>& Q, double c,
                                      const std::vector<ConePoint>& block);

}  // namespace wkg
