#pragma once
// Low-order vector-field towers on a hyperboloid slice.  From the sampled
// first-order data (w, dt w, grad w for w = u, v) the full Cartesian
// Hessian is reconstructed pointwise by combining tangential grid
// derivatives with the evolution equations, and third derivatives follow
// from one more tangential pass closed with the principal part of the
// differentiated equations.  The result is a truncated Taylor expansion
// (order 3) of each field at each grid point of H*_s, from which any word
// Z^I over {d_t, d_1, d_2, L_1, L_2} with |I| <= 2 is evaluated exactly,
// together with the first derivatives of the word value.

#include "wkg/evolve.hpp"
#include "wkg/geometry.hpp"

namespace wkg {

struct TowerPoint {
  int i = 0, j = 0;
  double x1 = 0, x2 = 0, r = 0, t = 0;
  // highest derivative order of the jets that is actually reconstructed:
  // 1 on the rim of the disc, 2 one ring in, 3 in the interior
  int order = 1;
  Jet u, v;  // local Taylor expansions (coefficients = derivs / factorial)
};

struct DerivativeTower {
  double s = 0, h = 0;
  std::vector<TowerPoint> pts;

  // Z^I w as a jet at the point (apply right-to-left); the result's
  // derivatives of total order d are trustworthy when |I| + d <= order.
  Jet word_jet(const TowerPoint& p, int field, const FieldWord& w) const;
  double word_value(const TowerPoint& p, int field, const FieldWord& w) const;
};

// Requires a complete sample; h is the grid spacing the sample came from.
// The coefficient set supplies the equations used to close the transversal
// derivatives.  Third time derivatives use the principal (linear) part of
// the differentiated equations; the neglected corrections are quadratic in
// the solution amplitude.
DerivativeTower build_tower(const HyperboloidSample& sample,
                            const CoefficientSet& co, double h);

// All words d^I L^J with |I| + |J| <= max_order (multi-index convention:
// partials sorted, boosts sorted, partials applied last).
std::vector<FieldWord> tower_words(int max_order);

}  // namespace wkg
