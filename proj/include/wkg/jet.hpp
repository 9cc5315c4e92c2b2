#pragma once
// Truncated Taylor expansions ("jets") of order 3 in the three coordinates
// (t, x1, x2).  All analytic-derivative machinery in the library is built on
// this type: a Jet carries the exact value and all partial derivatives of a
// closed-form expression up to total order 3, so repeated application of
// first-order differential operators (up to depth 3) is exact up to round-off.

#include <array>
#include <cmath>
#include <cstddef>

namespace wkg {

// Monomials t^i x1^j x2^k with i+j+k <= 3, 20 of them.
inline constexpr int kJetTerms = 20;
inline constexpr int kJetOrder = 3;

namespace jetdetail {
struct Mono {
  int i, j, k;
};
// Order of enumeration: by total degree, then lexicographic.
constexpr std::array<Mono, kJetTerms> kMono = {{
    {0, 0, 0},
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
    {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1}, {1, 0, 2},
    {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3},
}};

constexpr int mono_index(int i, int j, int k) {
  for (int n = 0; n < kJetTerms; ++n)
    if (kMono[n].i == i && kMono[n].j == j && kMono[n].k == k) return n;
  return -1;
}
}  // namespace jetdetail

class Jet {
 public:
  // Taylor coefficients: c[n] = d^m f / m! for the monomial kMono[n].
  std::array<double, kJetTerms> c{};

  Jet() = default;
  explicit Jet(double v) { c[0] = v; }

  double value() const { return c[0]; }

  // Partial-derivative value d^(i,j,k) f (not the Taylor coefficient).
  double deriv(int i, int j, int k) const;

  static Jet constant(double v) { return Jet(v); }
  // Coordinate variable: axis 0 = t, 1 = x1, 2 = x2.
  static Jet variable(double v, int axis);

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator+(const Jet& a, double s);
Jet operator+(double s, const Jet& a);
Jet operator-(const Jet& a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(const Jet& a, double s);
Jet operator*(double s, const Jet& a);
Jet operator/(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, double s);
Jet operator/(double s, const Jet& a);

// Univariate composition f(g) given f's derivatives f0..f3 at g.value().
Jet jet_compose(double f0, double f1, double f2, double f3, const Jet& g);

Jet jet_sqrt(const Jet& g);
Jet jet_exp(const Jet& g);
Jet jet_log(const Jet& g);
Jet jet_sin(const Jet& g);
Jet jet_cos(const Jet& g);
Jet jet_pow(const Jet& g, double p);   // g.value() > 0
Jet jet_powi(const Jet& g, int n);     // integer power, any sign of g for n>=0

// First-order partial derivative of a jet.  The result's top-order (total
// degree 3) coefficients are unknown and set to zero; callers must not chain
// more than 3 derivative applications in total.
Jet jet_dt(const Jet& f);
Jet jet_dx1(const Jet& f);
Jet jet_dx2(const Jet& f);
Jet jet_d(const Jet& f, int axis);

}  // namespace wkg
