#pragma once
// Coordinates on the translated light-cone, hyperbolic and semi-hyperboloidal
// frames, frame metrics, tensor component transforms, vector-field calculus
// on jets, and the (s/t)-weight bound checks.

#include <array>
#include <string>
#include <vector>

#include "wkg/jet.hpp"

namespace wkg {

struct Mat3 {
  double m[3][3] = {};
  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }
  static Mat3 identity();
  static Mat3 minkowski();  // diag(1, -1, -1)
};

Mat3 mat_mul(const Mat3& a, const Mat3& b);
double mat_max_abs_diff(const Mat3& a, const Mat3& b);

enum class FrameKind { hyperbolic, semi };

// A point of the (t, x1, x2) space-time.  Factory in_cone() enforces
// membership in the interior cone K = {t > r + 1}.
class ConePoint {
 public:
  ConePoint(double t, double x1, double x2);
  static ConePoint in_cone(double t, double x1, double x2);

  double t() const { return t_; }
  double x1() const { return x1_; }
  double x2() const { return x2_; }
  double x(int a) const { return a == 1 ? x1_ : x2_; }
  double r() const { return r_; }
  double s() const { return s_; }
  bool inside_cone() const { return t_ > r_ + 1.0; }

 private:
  double t_, x1_, x2_, r_, s_;
};

struct FrameMatrices {
  Mat3 phi;  // frame field in terms of Cartesian:  e_alpha = phi[alpha][beta] d_beta
  Mat3 psi;  // inverse:  d_alpha = psi[alpha][beta] e_beta
  FrameKind kind;
};

struct FrameMetric {
  Mat3 upper;    // m^{alpha beta} in the frame
  Mat3 lower;    // m_{alpha beta} in the frame
  FrameKind kind;
};

// Transition matrices at a point.  Hyperbolic kind requires s/t >= 1e-8
// (the matrices are singular on the cone); semi kind requires t > 0.
FrameMatrices frame_at(const ConePoint& p, FrameKind kind);

// Minkowski metric components in the requested frame (closed forms).
FrameMetric metric_in_frame(const ConePoint& p, FrameKind kind);

// Contraction oracle: push diag(1,-1,-1) through the transition matrices.
Mat3 metric_by_contraction(const ConePoint& p, FrameKind kind);

// Contravariant rank-2 components Cartesian -> frame and back.
Mat3 tensor_to_frame(const Mat3& T, const ConePoint& p, FrameKind kind);
Mat3 tensor_from_frame(const Mat3& T, const ConePoint& p, FrameKind kind);

// Underlined (semi-frame) components of constant tensors.
std::array<double, 3> underline_rank1(const std::array<double, 3>& v,
                                      const ConePoint& p);
Mat3 underline_rank2(const Mat3& T, const ConePoint& p);
// Single component of an underlined rank-3 tensor.
double underline_rank3_component(const double Q[3][3][3], const ConePoint& p,
                                 int a, int b, int g);

// ---- vector-field calculus on jets -----------------------------------------

// Coordinate jets at a point; the base object for analytic evaluation.
struct PointJets {
  Jet t, x1, x2;
  explicit PointJets(const ConePoint& p)
      : t(Jet::variable(p.t(), 0)),
        x1(Jet::variable(p.x1(), 1)),
        x2(Jet::variable(p.x2(), 2)) {}
  Jet x(int a) const { return a == 1 ? x1 : x2; }
  Jet r2() const { return x1 * x1 + x2 * x2; }
  Jet s2() const { return t * t - r2(); }
  Jet s() const { return jet_sqrt(s2()); }
  Jet st() const { return s() / t; }  // (s/t)
};

// First-order operators acting on jets of functions of (t, x1, x2).
Jet op_dt(const Jet& f);
Jet op_dx(const Jet& f, int a);                          // a in {1,2}
Jet op_boost(const PointJets& pj, const Jet& f, int a);  // L_a = x^a dt + t dx_a
Jet op_under(const PointJets& pj, const Jet& f, int a);  // (x^a/t) dt + dx_a
Jet op_dbar_s(const PointJets& pj, const Jet& f);        // (s/t) dt
Jet op_scaling_k(const PointJets& pj, const Jet& f);     // K = s(s/t)dt + 2 x^a under_a

// ---- (s/t)-bound checks -----------------------------------------------------

// A vector-field word: symbols d0, d1, d2 (partials), L1, L2 (boosts),
// u1, u2 (semi-hyperboloidal derivatives).
struct FieldWord {
  std::vector<std::string> symbols;
  int count_partials() const;
  int count_boosts() const;
  int count_under() const;
  static FieldWord parse(const std::string& text);  // e.g. "L1 d0"
};

struct StBoundReport {
  double max_ratio = 0.0;
  bool satisfied = true;
  double worst_t = 0.0, worst_x1 = 0.0, worst_x2 = 0.0;
};

// Evaluates Z^I((s/t)^l t^n) by exact jet differentiation and compares
// against t^{n-k}(s/t)^l (times t/s^2 when the word contains a partial).
// The pass constant is pinned; the observed supremum is reported.
StBoundReport st_bound_check(int l, int n, const FieldWord& word,
                             const std::vector<ConePoint>& samples,
                             double pass_constant = 32.0);

// Z^I f for a closed-form f supplied as a jet at the point.
Jet apply_word(const PointJets& pj, const FieldWord& word, const Jet& f);

// Random points strictly inside the cone (deterministic given the seed),
// with s/t bounded below by st_floor.
std::vector<ConePoint> random_cone_points(int count, unsigned seed,
                                          double st_floor = 0.05,
                                          double t_min = 3.0,
                                          double t_max = 40.0);

}  // namespace wkg
