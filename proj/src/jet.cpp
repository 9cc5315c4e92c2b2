#include "wkg/jet.hpp"

#include <stdexcept>

namespace wkg {
namespace {

using jetdetail::kMono;
using jetdetail::mono_index;

struct MulTable {
  // For each pair (a,b) with compatible degrees, the product index.
  // prod[a][b] = index of monomial a*b, or -1 when degree > 3.
  int prod[kJetTerms][kJetTerms];
  MulTable() {
    for (int a = 0; a < kJetTerms; ++a)
      for (int b = 0; b < kJetTerms; ++b) {
        const auto& ma = kMono[a];
        const auto& mb = kMono[b];
        int i = ma.i + mb.i, j = ma.j + mb.j, k = ma.k + mb.k;
        prod[a][b] = (i + j + k <= kJetOrder) ? mono_index(i, j, k) : -1;
      }
  }
};
const MulTable& mul_table() {
  static const MulTable t;
  return t;
}

double factorial(int n) {
  static const double f[4] = {1, 1, 2, 6};
  return f[n];
}

}  // namespace

double Jet::deriv(int i, int j, int k) const {
  int n = mono_index(i, j, k);
  if (n < 0) throw std::out_of_range("Jet::deriv: order > 3");
  return c[n] * factorial(kMono[n].i) * factorial(kMono[n].j) *
         factorial(kMono[n].k);
}

Jet Jet::variable(double v, int axis) {
  Jet r(v);
  r.c[1 + axis] = 1.0;
  return r;
}

Jet Jet::operator-() const {
  Jet r;
  for (int n = 0; n < kJetTerms; ++n) r.c[n] = -c[n];
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  for (int n = 0; n < kJetTerms; ++n) c[n] += o.c[n];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (int n = 0; n < kJetTerms; ++n) c[n] -= o.c[n];
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r += b;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const MulTable& mt = mul_table();
  Jet r;
  for (int n = 0; n < kJetTerms; ++n) {
    double ca = a.c[n];
    if (ca == 0.0) continue;
    for (int m = 0; m < kJetTerms; ++m) {
      int p = mt.prod[n][m];
      if (p >= 0) r.c[p] += ca * b.c[m];
    }
  }
  return r;
}

Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.c[0] += s;
  return r;
}
Jet operator+(double s, const Jet& a) { return a + s; }
Jet operator-(const Jet& a, double s) { return a + (-s); }
Jet operator-(double s, const Jet& a) { return (-a) + s; }
Jet operator*(const Jet& a, double s) {
  Jet r;
  for (int n = 0; n < kJetTerms; ++n) r.c[n] = a.c[n] * s;
  return r;
}
Jet operator*(double s, const Jet& a) { return a * s; }
Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

Jet jet_compose(double f0, double f1, double f2, double f3, const Jet& g) {
  Jet d = g;
  d.c[0] = 0.0;  // nilpotent part
  Jet r(f3 / 6.0);
  r = r * d + Jet(f2 / 2.0);
  r = r * d + Jet(f1);
  r = r * d + Jet(f0);
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  double v = b.value();
  if (v == 0.0) throw std::domain_error("Jet division by zero");
  Jet inv = jet_compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v),
                        -6.0 / (v * v * v * v), b);
  return a * inv;
}

Jet operator/(double s, const Jet& a) { return Jet(s) / a; }

Jet jet_sqrt(const Jet& g) {
  double v = g.value();
  if (v <= 0.0) throw std::domain_error("jet_sqrt: non-positive value");
  double s = std::sqrt(v);
  return jet_compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v), g);
}

Jet jet_exp(const Jet& g) {
  double e = std::exp(g.value());
  return jet_compose(e, e, e, e, g);
}

Jet jet_log(const Jet& g) {
  double v = g.value();
  if (v <= 0.0) throw std::domain_error("jet_log: non-positive value");
  return jet_compose(std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v),
                     g);
}

Jet jet_sin(const Jet& g) {
  double s = std::sin(g.value()), c = std::cos(g.value());
  return jet_compose(s, c, -s, -c, g);
}

Jet jet_cos(const Jet& g) {
  double s = std::sin(g.value()), c = std::cos(g.value());
  return jet_compose(c, -s, -c, s, g);
}

Jet jet_pow(const Jet& g, double p) {
  double v = g.value();
  if (v <= 0.0) throw std::domain_error("jet_pow: non-positive base");
  double f0 = std::pow(v, p);
  double f1 = p * f0 / v;
  double f2 = p * (p - 1) * f0 / (v * v);
  double f3 = p * (p - 1) * (p - 2) * f0 / (v * v * v);
  return jet_compose(f0, f1, f2, f3, g);
}

Jet jet_powi(const Jet& g, int n) {
  if (n < 0) return Jet(1.0) / jet_powi(g, -n);
  Jet r(1.0);
  Jet base = g;
  while (n > 0) {
    if (n & 1) r = r * base;
    base = base * base;
    n >>= 1;
  }
  return r;
}

Jet jet_d(const Jet& f, int axis) {
  using jetdetail::kMono;
  using jetdetail::mono_index;
  Jet r;
  for (int n = 0; n < kJetTerms; ++n) {
    auto m = kMono[n];
    int e[3] = {m.i, m.j, m.k};
    if (e[axis] == 0) continue;
    int src_exp = e[axis];
    e[axis] -= 1;
    int tgt = mono_index(e[0], e[1], e[2]);
    r.c[tgt] += src_exp * f.c[n];
  }
  return r;
}

Jet jet_dt(const Jet& f) { return jet_d(f, 0); }
Jet jet_dx1(const Jet& f) { return jet_d(f, 1); }
Jet jet_dx2(const Jet& f) { return jet_d(f, 2); }

}  // namespace wkg
