#pragma once
// Constant coefficient tensors of the coupled wave / Klein-Gordon system,
// the null-condition decision procedure, and the coupling classification.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "wkg/geometry.hpp"

namespace wkg {

using Rank1 = std::array<double, 3>;
using Rank3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

// Symmetric bi- or tri-linear form on R^{2+1}.
class MultilinearForm {
 public:
  static MultilinearForm rank2(const Mat3& raw);    // symmetrizes
  static MultilinearForm rank3(const Rank3& raw);   // symmetrizes
  // Keeps the components exactly as given (used to exercise the
  // symmetric-input precondition of is_null).
  static MultilinearForm rank2_raw(const Mat3& raw);
  static MultilinearForm rank3_raw(const Rank3& raw);

  int rank() const { return rank_; }
  bool is_symmetric(double tol = 0.0) const;
  MultilinearForm symmetrized() const;

  double comp2(int a, int b) const { return m2_(a, b); }
  double comp3(int a, int b, int g) const { return m3_[a][b][g]; }

  // Full contraction with a single vector repeated rank times.
  double eval(const Rank1& xi) const;

  MultilinearForm& operator*=(double s);

 private:
  MultilinearForm() = default;
  int rank_ = 2;
  Mat3 m2_;
  Rank3 m3_{};
};

struct NullDecision {
  bool null = true;
  double witness_theta = 0.0;  // maximizer of |p| over the sample angles
  double max_abs_p = 0.0;
};

// Exact decision via the restriction p(theta) = Form(xi(theta),...) with
// xi = (1, cos theta, sin theta): a trigonometric polynomial of degree
// <= rank, identically zero iff zero at 2*rank+1 distinct angles.
// Threshold 1e-10 on |p|.  Throws std::invalid_argument on a
// non-symmetric input.
NullDecision is_null(const MultilinearForm& form);

struct CoefficientSet {
  // quasilinear blocks
  Rank3 P1{}, P3{}, P5{}, P7{};
  Mat3 P2, P4, P6, P8;
  // semilinear gradient couplers
  Mat3 A1, A3, A5, A7;
  Rank1 A2{}, A4{}, A6{}, A8{};
  // undifferentiated sources into the wave / KG equations
  Mat3 B1, B3;
  Rank1 B2{}, B4{};
  double D1 = 0, D3 = 0, D5 = 0, D7 = 0;
  Rank1 D2{}, D6{};
  double K1 = 0, K2 = 0;
  double c = 1.0;  // Klein-Gordon mass

  // Throws std::invalid_argument on non-finite entries or c <= 0.
  void validate() const;
  // Names among {A2, D1, D2, D3, D5, D6, D7, P6} carrying nonzero values;
  // these are accepted but flagged (zero by standing assumption).
  std::vector<std::string> flagged_nonzero() const;
};

enum class Coupling { weak, strong };

// weak iff B1 = 0, B2 = 0, and K1 = 0.  The K1 requirement is a recorded
// decision; the classification report carries a note when it is the sole
// strong trigger.
Coupling classify_coupling(const CoefficientSet& coeffs);

struct ClassificationReport {
  Coupling coupling = Coupling::weak;
  std::map<std::string, NullDecision> null_status;  // P1,P2,P3,P5,A1,A3,A5,A7
  bool theorem1_admissible = false;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
};

ClassificationReport theorem1_admissible(const CoefficientSet& coeffs);

// Underlined (semi-hyperboloidal frame) components of a named tensor at a
// point of the cone interior.  Rank decides which member is meaningful.
struct UnderlinedTensor {
  int rank = 0;  // 0 scalar, 1, 2, 3
  double scalar = 0.0;
  Rank1 v{};
  Mat3 m;
  Rank3 q{};
};
UnderlinedTensor semi_frame_coefficient(const CoefficientSet& coeffs,
                                        const std::string& which,
                                        const ConePoint& p);

// ---- text serialization -----------------------------------------------------
// Grammar inside a [coefficients] section: `NAME.INDEXDIGITS = float` for
// tensor entries (e.g. `P1.000 = 1.0`, `B2.2 = 0.5`) and `NAME = float`
// for scalars (c, D1, D3, D5, D7, K1, K2).  Unlisted entries are zero.
CoefficientSet parse_coefficients(const std::string& section_body);
std::string serialize_coefficients(const CoefficientSet& coeffs);

// Helpers shared with the evolution module: evaluate the quadratic
// right-hand sides.  First derivatives du = (d_t, d_x1, d_x2).
struct FirstOrder {
  double u = 0;
  Rank1 du{};
};
// P-contractions need second derivatives; supplied as symmetric Mat3
// (dd[a][b] = d_a d_b).
double rhs_wave(const CoefficientSet& co, const FirstOrder& u,
                const FirstOrder& v, const Mat3& ddu);
double rhs_kg(const CoefficientSet& co, const FirstOrder& u,
              const FirstOrder& v, const Mat3& ddv);
// The coefficient of d_t d_t in each equation (for the quasilinear solve).
double quasilinear_tt_wave(const CoefficientSet& co, const FirstOrder& u,
                           const FirstOrder& v);
double quasilinear_tt_kg(const CoefficientSet& co, const FirstOrder& u,
                         const FirstOrder& v);

}  // namespace wkg
