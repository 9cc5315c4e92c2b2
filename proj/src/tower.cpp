#include "wkg/tower.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wkg {

namespace {

// quasilinear coefficient tensor and semilinear remainder of one equation,
// extracted by probing the right-hand side with unit Hessian entries
void probe_rhs(bool wave, const CoefficientSet& co, const FirstOrder& U,
               const FirstOrder& V, Mat3& P, double& G) {
  Mat3 zero;
  G = wave ? rhs_wave(co, U, V, zero) : rhs_kg(co, U, V, zero);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Mat3 e;
      e(a, b) = 1.0;
      P(a, b) = (wave ? rhs_wave(co, U, V, e) : rhs_kg(co, U, V, e)) - G;
    }
}

struct Hess {
  bool ok = false;
  double dd[3][3] = {};  // symmetric Cartesian second derivatives
};

// solve for the Hessian given tangential derivatives of the first-order
// data: A[a] = under_a(dt w), B[a][b] = under_b(d_a w)
Hess solve_hessian(const double A[2], const double B[2][2], double lapless,
                   const Mat3& P, double G, double t, const double x[2]) {
  // every entry is affine in X = dtt w
  double b[3][3] = {}, m[3][3] = {};
  m[0][0] = 1.0;
  for (int a = 0; a < 2; ++a) {
    b[0][a + 1] = b[a + 1][0] = A[a];
    m[0][a + 1] = m[a + 1][0] = -x[a] / t;
  }
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) {
      b[a + 1][c + 1] = 0.5 * (B[a][c] + B[c][a]) -
                        0.5 * (x[c] / t * A[a] + x[a] / t * A[c]);
      m[a + 1][c + 1] = x[a] * x[c] / (t * t);
    }
  // X = laplacian + P : dd + G  (the c^2 w term of the KG equation rides
  // in through `lapless`)
  double num = lapless + G, den = 1.0;
  for (int a = 1; a < 3; ++a) {
    num += b[a][a];
    den -= m[a][a];
  }
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) {
      num += P(a, c) * b[a][c];
      den -= P(a, c) * m[a][c];
    }
  Hess h;
  if (std::fabs(den) < 0.25) return h;  // degenerate; leave the point at order 1
  double X = num / den;
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) h.dd[a][c] = b[a][c] + m[a][c] * X;
  h.ok = true;
  return h;
}

int fact(int n) { return n <= 1 ? 1 : n * fact(n - 1); }

Jet jet_from_derivs(double w, const double d[3], const double dd[3][3],
                    const double T[3][3][3]) {
  Jet f;
  using jetdetail::mono_index;
  f.c[0] = w;
  f.c[mono_index(1, 0, 0)] = d[0];
  f.c[mono_index(0, 1, 0)] = d[1];
  f.c[mono_index(0, 0, 1)] = d[2];
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      int idx[3] = {0, 0, 0};
      ++idx[a];
      ++idx[b];
      f.c[mono_index(idx[0], idx[1], idx[2])] =
          dd[a][b] / (fact(idx[0]) * fact(idx[1]) * fact(idx[2]));
    }
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      for (int g = b; g < 3; ++g) {
        int idx[3] = {0, 0, 0};
        ++idx[a];
        ++idx[b];
        ++idx[g];
        f.c[mono_index(idx[0], idx[1], idx[2])] =
            T[a][b][g] / (fact(idx[0]) * fact(idx[1]) * fact(idx[2]));
      }
  return f;
}

}  // namespace

DerivativeTower build_tower(const HyperboloidSample& sample,
                            const CoefficientSet& co, double h) {
  if (!sample.complete)
    throw std::invalid_argument("tower requires a complete hyperboloid sample");
  co.validate();
  DerivativeTower tw;
  tw.s = sample.s;
  tw.h = h;
  size_t np = sample.records.size();
  tw.pts.resize(np);

  // dense (i,j) -> record index map for neighbor lookups
  int imin = 1 << 30, imax = -(1 << 30), jmin = 1 << 30, jmax = -(1 << 30);
  for (const auto& r : sample.records) {
    imin = std::min(imin, r.i);
    imax = std::max(imax, r.i);
    jmin = std::min(jmin, r.j);
    jmax = std::max(jmax, r.j);
  }
  int ni = imax - imin + 1, nj = jmax - jmin + 1;
  std::vector<int> pos((size_t)ni * nj, -1);
  auto at = [&](int i, int j) -> int {
    if (i < imin || i > imax || j < jmin || j > jmax) return -1;
    return pos[(size_t)(i - imin) * nj + (j - jmin)];
  };
  for (size_t k = 0; k < np; ++k) {
    const auto& r = sample.records[k];
    pos[(size_t)(r.i - imin) * nj + (r.j - jmin)] = (int)k;
  }

  // pass 1: copy point metadata and first-order data
  std::vector<Hess> hu(np), hv(np);
  for (size_t k = 0; k < np; ++k) {
    const auto& r = sample.records[k];
    TowerPoint& p = tw.pts[k];
    p.i = r.i;
    p.j = r.j;
    p.x1 = r.x1;
    p.x2 = r.x2;
    p.r = r.r;
    p.t = r.t;
    p.order = 1;
  }

  auto rec = [&](int k) -> const SampleRecord& { return sample.records[k]; };
  double c2 = co.c * co.c;

  // pass 2: Hessians where the four neighbors exist.  Tangential grid
  // derivatives of a restricted field give the under_a derivatives.
  for (size_t k = 0; k < np; ++k) {
    const auto& r = rec((int)k);
    int e = at(r.i + 1, r.j), w = at(r.i - 1, r.j);
    int n = at(r.i, r.j + 1), s = at(r.i, r.j - 1);
    if (e < 0 || w < 0 || n < 0 || s < 0) continue;
    double x[2] = {r.x1, r.x2};
    FirstOrder U{r.u, {r.ut, r.du1, r.du2}};
    FirstOrder V{r.v, {r.vt, r.dv1, r.dv2}};

    auto D = [&](double fe, double fw, double fn, double fs, int a) {
      return a == 0 ? (fe - fw) / (2 * h) : (fn - fs) / (2 * h);
    };
    {
      double A[2], B[2][2];
      for (int a = 0; a < 2; ++a)
        A[a] = D(rec(e).ut, rec(w).ut, rec(n).ut, rec(s).ut, a);
      for (int b = 0; b < 2; ++b) {
        B[0][b] = D(rec(e).du1, rec(w).du1, rec(n).du1, rec(s).du1, b);
        B[1][b] = D(rec(e).du2, rec(w).du2, rec(n).du2, rec(s).du2, b);
      }
      Mat3 P;
      double G;
      probe_rhs(true, co, U, V, P, G);
      hu[k] = solve_hessian(A, B, 0.0, P, G, r.t, x);
    }
    {
      double A[2], B[2][2];
      for (int a = 0; a < 2; ++a)
        A[a] = D(rec(e).vt, rec(w).vt, rec(n).vt, rec(s).vt, a);
      for (int b = 0; b < 2; ++b) {
        B[0][b] = D(rec(e).dv1, rec(w).dv1, rec(n).dv1, rec(s).dv1, b);
        B[1][b] = D(rec(e).dv2, rec(w).dv2, rec(n).dv2, rec(s).dv2, b);
      }
      Mat3 P;
      double G;
      probe_rhs(false, co, U, V, P, G);
      hv[k] = solve_hessian(A, B, -c2 * r.v, P, G, r.t, x);
    }
    if (hu[k].ok && hv[k].ok) tw.pts[k].order = 2;
  }

  // pass 3: third derivatives where the neighbors carry Hessians; the
  // transversal closure uses the principal part d_t(dtt w) = lap(dt w)
  // (- c^2 dt w for the KG component)
  for (size_t k = 0; k < np; ++k) {
    if (tw.pts[k].order < 2) continue;
    const auto& r = rec((int)k);
    int nb[4] = {at(r.i + 1, r.j), at(r.i - 1, r.j), at(r.i, r.j + 1),
                 at(r.i, r.j - 1)};
    bool ok = true;
    for (int q : nb) ok = ok && q >= 0 && tw.pts[q].order >= 2;
    double x[2] = {r.x1, r.x2};
    double t = r.t;
    double Tu[3][3][3] = {}, Tv[3][3][3] = {};
    if (ok) {
      for (int field = 0; field < 2; ++field) {
        const std::vector<Hess>& H = field == 0 ? hu : hv;
        double (&T)[3][3][3] = field == 0 ? Tu : Tv;
        auto Ddd = [&](int a, int al, int be) {
          const Hess& p = H[nb[a == 0 ? 0 : 2]];
          const Hess& m = H[nb[a == 0 ? 1 : 3]];
          return (p.dd[al][be] - m.dd[al][be]) / (2 * h);
        };
        double dtw = field == 0 ? r.ut : r.vt;
        double num = field == 0 ? 0.0 : -c2 * dtw;
        double den = 1.0;
        for (int a = 0; a < 2; ++a) {
          num += Ddd(a, 0, a + 1) - x[a] / t * Ddd(a, 0, 0);
          den -= x[a] * x[a] / (t * t);
        }
        double X = num / den;  // den = (s/t)^2 > 0 inside the cone
        T[0][0][0] = X;
        for (int a = 0; a < 2; ++a)
          T[0][0][a + 1] = T[0][a + 1][0] = T[a + 1][0][0] =
              Ddd(a, 0, 0) - x[a] / t * X;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double v1 = Ddd(b, 0, a + 1) - x[b] / t * T[0][0][a + 1];
            double v2 = Ddd(a, 0, b + 1) - x[a] / t * T[0][0][b + 1];
            double val = 0.5 * (v1 + v2);
            T[0][a + 1][b + 1] = T[a + 1][0][b + 1] = T[a + 1][b + 1][0] =
                val;
          }
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int g = 0; g < 2; ++g) {
              double val = Ddd(g, a + 1, b + 1) -
                           x[g] / t * T[0][a + 1][b + 1];
              // symmetrize over the routes reaching the same entry
              T[a + 1][b + 1][g + 1] += val / 1.0;
            }
      }
      // average the spatial-third routes: each fully spatial entry was
      // accumulated once per ordering of its last index
      for (double(*T)[3][3] :
           {(double(*)[3][3])Tu, (double(*)[3][3])Tv}) {
        double t111 = T[1][1][1], t222 = T[2][2][2];
        double t112 = (T[1][1][2] + T[1][2][1] + T[2][1][1]) / 3.0;
        double t122 = (T[1][2][2] + T[2][1][2] + T[2][2][1]) / 3.0;
        (void)t111;
        (void)t222;
        for (int a = 1; a < 3; ++a)
          for (int b = 1; b < 3; ++b)
            for (int g = 1; g < 3; ++g) {
              int sum = a + b + g;
              if (sum == 4)
                T[a][b][g] = t112;
              else if (sum == 5)
                T[a][b][g] = t122;
            }
      }
      tw.pts[k].order = 3;
    }
    double du[3] = {r.ut, r.du1, r.du2}, dv[3] = {r.vt, r.dv1, r.dv2};
    tw.pts[k].u = jet_from_derivs(r.u, du, hu[k].dd, Tu);
    tw.pts[k].v = jet_from_derivs(r.v, dv, hv[k].dd, Tv);
  }
  // order-1 points still carry their first-order data in the jet
  for (size_t k = 0; k < np; ++k) {
    if (tw.pts[k].order >= 2) continue;
    const auto& r = rec((int)k);
    double du[3] = {r.ut, r.du1, r.du2}, dv[3] = {r.vt, r.dv1, r.dv2};
    double zdd[3][3] = {}, zT[3][3][3] = {};
    tw.pts[k].u = jet_from_derivs(r.u, du, zdd, zT);
    tw.pts[k].v = jet_from_derivs(r.v, dv, zdd, zT);
  }
  return tw;
}

Jet DerivativeTower::word_jet(const TowerPoint& p, int field,
                              const FieldWord& w) const {
  // plain constructor: rim records sit exactly on t = r + 1, which the
  // cone-membership factory would reject; the jet operators are regular
  // there
  ConePoint cp(p.t, p.x1, p.x2);
  PointJets pj(cp);
  return apply_word(pj, w, field == 0 ? p.u : p.v);
}

double DerivativeTower::word_value(const TowerPoint& p, int field,
                                   const FieldWord& w) const {
  return word_jet(p, field, w).value();
}

std::vector<FieldWord> tower_words(int max_order) {
  std::vector<FieldWord> out;
  const char* dsym[3] = {"d0", "d1", "d2"};
  const char* lsym[2] = {"L1", "L2"};
  out.push_back(FieldWord{});
  if (max_order >= 1) {
    for (auto* s : dsym) out.push_back(FieldWord{{s}});
    for (auto* s : lsym) out.push_back(FieldWord{{s}});
  }
  if (max_order >= 2) {
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        out.push_back(FieldWord{{dsym[a], dsym[b]}});
    for (auto* d : dsym)
      for (auto* l : lsym) out.push_back(FieldWord{{d, l}});
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b)
        out.push_back(FieldWord{{lsym[a], lsym[b]}});
  }
  if (max_order >= 3)
    throw std::invalid_argument("towers are built to order 2 only");
  return out;
}

}  // namespace wkg
