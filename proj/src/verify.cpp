#include "wkg/verify.hpp"

#include <cmath>
#include <stdexcept>

namespace wkg {

double TestField::value(double t, double x1, double x2) const {
  PointJets pj{ConePoint(t, x1, x2)};
  return fn(pj).value();
}

std::vector<TestField> test_field_library() {
  std::vector<TestField> lib;
  lib.push_back({"zero", [](const PointJets&) { return Jet(0.0); }});
  lib.push_back({"one", [](const PointJets&) { return Jet(1.0); }});
  lib.push_back({"linear_t", [](const PointJets& p) { return p.t; }});
  lib.push_back({"linear_x1", [](const PointJets& p) { return p.x1; }});
  lib.push_back({"quadratic_t", [](const PointJets& p) { return p.t * p.t; }});
  lib.push_back({"x1x2", [](const PointJets& p) { return p.x1 * p.x2; }});
  // Gaussian in x times trig in t
  lib.push_back({"gauss_trig", [](const PointJets& p) {
                   return jet_exp((p.x1 * p.x1 + p.x2 * p.x2) * -0.25) *
                          jet_sin(p.t);
                 }});
  // polynomial bump (degree 3: jets carry it exactly); small coefficients
  // keep the conformal-identity round-off below 1e-8 on the test cloud
  lib.push_back({"poly_bump", [](const PointJets& p) {
                   return (1.0 + 0.1 * p.t) * p.x1 * p.x1 * 0.005 +
                          p.x1 * p.x2 * (p.t * -0.0005) + 0.003 * p.x1 -
                          0.002 * p.x2 * p.x2 * p.x2;
                 }});
  // homogeneous of degree 2: t^2 * f(x/t)
  lib.push_back({"homog2_angular", [](const PointJets& p) {
                   return p.t * p.t * jet_sin(p.x1 / p.t) *
                          jet_cos(p.x2 / p.t);
                 }});
  return lib;
}

TestField test_field(const std::string& name) {
  for (auto& f : test_field_library())
    if (f.name == name) return f;
  throw std::invalid_argument("unknown test field: " + name);
}

JetProvider analytic_provider(const TestField& f) {
  auto fn = f.fn;
  return [fn](const ConePoint& p) { return fn(PointJets(p)); };
}

JetProvider fd_provider(const TestField& f, double h) {
  TestField cap = f;
  return [cap, h](const ConePoint& p) {
    double q[3] = {p.t(), p.x1(), p.x2()};
    auto ev = [&](double dt, double d1, double d2) {
      return cap.value(q[0] + dt, q[1] + d1, q[2] + d2);
    };
    Jet j;
    using jetdetail::mono_index;
    double f0 = ev(0, 0, 0);
    j.c[0] = f0;
    double step[3][3] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}};
    for (int a = 0; a < 3; ++a) {
      const double* e = step[a];
      double fp = ev(e[0], e[1], e[2]);
      double fm = ev(-e[0], -e[1], -e[2]);
      int idx[3] = {0, 0, 0};
      idx[a] = 1;
      j.c[mono_index(idx[0], idx[1], idx[2])] = (fp - fm) / (2 * h);
      idx[a] = 2;  // Taylor coefficient = second derivative / 2
      j.c[mono_index(idx[0], idx[1], idx[2])] =
          (fp - 2 * f0 + fm) / (h * h) / 2.0;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        double d[3] = {0, 0, 0};
        d[a] = h;
        d[b] = h;
        double fpp = ev(d[0], d[1], d[2]);
        double fmm = ev(-d[0], -d[1], -d[2]);
        d[b] = -h;
        double fpm = ev(d[0], d[1], d[2]);
        double fmp = ev(-d[0], -d[1], -d[2]);
        int idx[3] = {0, 0, 0};
        idx[a] = 1;
        idx[b] = 1;
        j.c[mono_index(idx[0], idx[1], idx[2])] =
            (fpp - fpm - fmp + fmm) / (4 * h * h);
      }
    return j;
  };
}

namespace {

// ---- generic calculus -------------------------------------------------------
// The identity assemblies below are templates over a small calculus context:
// analytic (jets) or nested centered stencils on the value function.

struct JetCalc {
  using F = Jet;
  PointJets pj;
  explicit JetCalc(const ConePoint& p) : pj(p) {}
  F t() const { return pj.t; }
  F x(int a) const { return pj.x(a); }
  F s() const { return pj.s(); }
  static F lift(double v) { return Jet(v); }
  F dt(const F& f) const { return jet_dt(f); }
  F dx(const F& f, int a) const { return jet_d(f, a); }
  static double eval(const F& f) { return f.value(); }
  F field(const TestField& tf) const { return tf.fn(pj); }
  F hfield(const CurvedMetricData& d, int i, int j) const {
    return d.h[i][j](pj);
  }
};

// lazy scalar field: value as a function of (t, x1, x2)
struct VF {
  std::function<double(double, double, double)> f;
  double operator()(double a, double b, double c) const { return f(a, b, c); }
};
VF operator+(const VF& a, const VF& b) {
  return {[a, b](double t, double x, double y) {
    return a(t, x, y) + b(t, x, y);
  }};
}
VF operator-(const VF& a, const VF& b) {
  return {[a, b](double t, double x, double y) {
    return a(t, x, y) - b(t, x, y);
  }};
}
VF operator*(const VF& a, const VF& b) {
  return {[a, b](double t, double x, double y) {
    return a(t, x, y) * b(t, x, y);
  }};
}
VF operator/(const VF& a, const VF& b) {
  return {[a, b](double t, double x, double y) {
    return a(t, x, y) / b(t, x, y);
  }};
}
VF operator*(double s, const VF& a) {
  return {[s, a](double t, double x, double y) { return s * a(t, x, y); }};
}
VF operator*(const VF& a, double s) { return s * a; }
VF operator-(const VF& a) { return -1.0 * a; }
VF operator+(const VF& a, double s) {
  return {[s, a](double t, double x, double y) { return a(t, x, y) + s; }};
}
VF operator+(double s, const VF& a) { return a + s; }
VF operator-(double s, const VF& a) { return (-a) + s; }
VF operator-(const VF& a, double s) { return a + (-s); }

struct FdCalc {
  using F = VF;
  double p0[3];
  double h;
  FdCalc(const ConePoint& p, double step) : p0{p.t(), p.x1(), p.x2()}, h(step) {}
  F t() const {
    return {[](double t, double, double) { return t; }};
  }
  F x(int a) const {
    if (a == 1) return {[](double, double x, double) { return x; }};
    return {[](double, double, double y) { return y; }};
  }
  F s() const {
    return {[](double t, double x, double y) {
      return std::sqrt(t * t - x * x - y * y);
    }};
  }
  static F lift(double v) {
    return {[v](double, double, double) { return v; }};
  }
  F dt(const F& f) const {
    double hh = h;
    return {[f, hh](double t, double x, double y) {
      return (f(t + hh, x, y) - f(t - hh, x, y)) / (2 * hh);
    }};
  }
  F dx(const F& f, int a) const {
    double hh = h;
    if (a == 1)
      return {[f, hh](double t, double x, double y) {
        return (f(t, x + hh, y) - f(t, x - hh, y)) / (2 * hh);
      }};
    return {[f, hh](double t, double x, double y) {
      return (f(t, x, y + hh) - f(t, x, y - hh)) / (2 * hh);
    }};
  }
  double eval(const F& f) const { return f(p0[0], p0[1], p0[2]); }
  F field(const TestField& tf) const {
    TestField cp = tf;
    return {[cp](double t, double x, double y) { return cp.value(t, x, y); }};
  }
  F hfield(const CurvedMetricData& d, int i, int j) const {
    auto fn = d.h[i][j];
    return {[fn](double t, double x, double y) {
      return fn(PointJets(ConePoint(t, x, y))).value();
    }};
  }
};

// derived operators shared by both modes
template <class C>
typename C::F c_under(const C& c, const typename C::F& f, int a) {
  return (c.x(a) / c.t()) * c.dt(f) + c.dx(f, a);
}
template <class C>
typename C::F c_boost(const C& c, const typename C::F& f, int a) {
  return c.x(a) * c.dt(f) + c.t() * c.dx(f, a);
}
template <class C>
typename C::F c_dbs(const C& c, const typename C::F& f) {
  return (c.s() / c.t()) * c.dt(f);
}

// ---- identity assemblies ----------------------------------------------------

template <class C>
double box_residual(const C& c, const typename C::F& u, bool corrupt_sign) {
  using F = typename C::F;
  F lhs = c.dt(c.dt(u)) - c.dx(c.dx(u, 1), 1) - c.dx(c.dx(u, 2), 2);
  F st = c.s() / c.t();
  F rhs = st * st * c.dt(c.dt(u));
  for (int a = 1; a <= 2; ++a) {
    rhs = rhs + 2.0 * (c.x(a) / c.t()) * c.dt(c_under(c, u, a));
    rhs = rhs - c_under(c, c_under(c, u, a), a);
  }
  F rt2 = (c.x(1) * c.x(1) + c.x(2) * c.x(2)) / (c.t() * c.t());
  F low = (2.0 + rt2) / c.t() * c.dt(u);
  rhs = corrupt_sign ? rhs - low : rhs + low;
  return std::fabs(c.eval(lhs - rhs));
}

template <class C>
void comm_residuals(const C& c, const typename C::F& u,
                    std::map<std::string, double>& out) {
  using F = typename C::F;
  auto up = [&](double v, const char* key) {
    out[key] = std::max(out[key], std::fabs(v));
  };
  for (int a = 1; a <= 2; ++a) {
    up(c.eval(c_boost(c, c.dt(u), a) - c.dt(c_boost(c, u, a)) + c.dx(u, a)),
       "boost_dt");
    for (int b = 1; b <= 2; ++b) {
      F lhs = c_boost(c, c.dx(u, b), a) - c.dx(c_boost(c, u, a), b);
      F rhs = (a == b) ? F(-1.0 * c.dt(u)) : C::lift(0.0);
      up(c.eval(lhs - rhs), "boost_dx");
    }
  }
  {
    F lhs = c_boost(c, c_boost(c, u, 2), 1) - c_boost(c, c_boost(c, u, 1), 2);
    F rhs = (c.x(1) / c.t()) * c_boost(c, u, 2) -
            (c.x(2) / c.t()) * c_boost(c, u, 1);
    up(c.eval(lhs - rhs), "boost_boost");
  }
  for (int a = 1; a <= 2; ++a) {
    F lhs = c.dt(c.dx(u, a));
    F rhs = -1.0 * (c.x(a) / c.t()) * c.dt(c.dt(u)) +
            (c.dt(c_boost(c, u, a)) - c_under(c, u, a) +
             (c.x(a) / c.t()) * c.dt(u)) /
                c.t();
    up(c.eval(lhs - rhs), "hessian_ta");
    for (int b = 1; b <= 2; ++b) {
      F xab = c.x(a) * c.x(b) / (c.t() * c.t());
      F lhs2 = c.dx(c.dx(u, b), a);
      F inner = c.dx(c_boost(c, u, b), a) -
                (c.x(b) / c.t()) * c.dt(c_boost(c, u, a)) +
                (c.x(b) / c.t()) * c_under(c, u, a) - xab * c.dt(u);
      if (a == b) inner = inner - c.dt(u);
      F rhs2 = xab * c.dt(c.dt(u)) + inner / c.t();
      up(c.eval(lhs2 - rhs2), "hessian_ab");
    }
  }
}

template <class C>
void curved_residual(const C& c, const typename C::F& u,
                     const CurvedMetricData& hdata, CurvedIdentityReport& rep) {
  using F = typename C::F;
  F s = c.s();
  auto dbs = [&](const F& f) { return c_dbs(c, f); };
  auto db = [&](const F& f, int a) { return c_under(c, f, a); };

  // hyperbolic-frame transition psi (row: Cartesian index, col: frame)
  F psi[3][3] = {{c.t() / s, C::lift(0.0), C::lift(0.0)},
                 {-1.0 * (c.x(1) / s), C::lift(1.0), C::lift(0.0)},
                 {-1.0 * (c.x(2) / s), C::lift(0.0), C::lift(1.0)}};

  F H[3][3] = {{c.hfield(hdata, 0, 0), c.hfield(hdata, 0, 1),
                c.hfield(hdata, 0, 2)},
               {c.hfield(hdata, 1, 0), c.hfield(hdata, 1, 1),
                c.hfield(hdata, 1, 2)},
               {c.hfield(hdata, 2, 0), c.hfield(hdata, 2, 1),
                c.hfield(hdata, 2, 2)}};
  F hbar[3][3] = {{C::lift(0.0), C::lift(0.0), C::lift(0.0)},
                  {C::lift(0.0), C::lift(0.0), C::lift(0.0)},
                  {C::lift(0.0), C::lift(0.0), C::lift(0.0)}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      F acc = C::lift(0.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc = acc + H[i][j] * psi[i][a] * psi[j][b];
      hbar[a][b] = acc;
    }

  F mbar[3][3] = {{C::lift(1.0), c.x(1) / s, c.x(2) / s},
                  {c.x(1) / s, C::lift(-1.0), C::lift(0.0)},
                  {c.x(2) / s, C::lift(0.0), C::lift(-1.0)}};
  F gbar[3][3] = {{C::lift(0.0), C::lift(0.0), C::lift(0.0)},
                  {C::lift(0.0), C::lift(0.0), C::lift(0.0)},
                  {C::lift(0.0), C::lift(0.0), C::lift(0.0)}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) gbar[a][b] = mbar[a][b] + hbar[a][b];

  F Ku = s * (gbar[0][0] * dbs(u) +
              2.0 * (gbar[1][0] * db(u, 1) + gbar[2][0] * db(u, 2)));
  F N = 1.0 + H[0][0] - H[1][1] - H[2][2] - 2.0 * hbar[0][0] -
        s * dbs(hbar[0][0]);
  F KNu = Ku + N * u;

  // left side with the Cartesian metric g = m + H
  Mat3 mk = Mat3::minkowski();
  F boxg = C::lift(0.0);
  auto cart_d = [&](const F& f, int al) {
    return al == 0 ? c.dt(f) : c.dx(f, al);
  };
  for (int al = 0; al < 3; ++al)
    for (int be = 0; be < 3; ++be)
      boxg = boxg + (C::lift(mk(al, be)) + H[al][be]) *
                        cart_d(cart_d(u, be), al);
  F lhs = s * KNu * boxg;

  F ebar = KNu * KNu;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      ebar = ebar - s * s * gbar[0][0] * gbar[a][b] * db(u, a) * db(u, b);
  F rhs = 0.5 * dbs(ebar);

  for (int a = 1; a <= 2; ++a) {
    F w = C::lift(0.0);
    for (int b = 1; b <= 2; ++b) w = w + s * Ku * gbar[a][b] * db(u, b);
    for (int cc = 1; cc <= 2; ++cc)
      for (int b = 1; b <= 2; ++b)
        w = w - s * s * gbar[a][0] * gbar[cc][b] * db(u, cc) * db(u, b);
    for (int b = 1; b <= 2; ++b) w = w + N * s * u * gbar[a][b] * db(u, b);
    rhs = rhs + db(w, a);
  }

  // curvature-like remainder; the L^{ab} expansion keeps every term
  // proportional to the perturbation so the flat limit is exactly zero
  F Rterm = C::lift(0.0);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) {
      F L = hbar[0][0] * gbar[a][b] + mbar[0][0] * hbar[a][b];
      for (int cc = 1; cc <= 2; ++cc) {
        L = L + s * db(hbar[0][cc] * gbar[a][b] + mbar[0][cc] * hbar[a][b], cc);
        L = L - 2.0 * s *
                    db(hbar[a][0] * gbar[cc][b] + mbar[0][a] * hbar[cc][b],
                       cc);
      }
      L = L + mbar[a][b];
      Rterm = Rterm + s * (L - N * gbar[a][b]) * db(u, a) * db(u, b);
      Rterm = Rterm + 0.5 * s * s *
                          dbs(hbar[0][0] * gbar[a][b] + hbar[a][b]) *
                          db(u, a) * db(u, b);
    }

  F Sinner = C::lift(0.0);
  for (int a = 1; a <= 2; ++a)
    Sinner = Sinner + 2.0 * dbs(s * hbar[a][0]) * db(u, a);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      Sinner = Sinner + s * db(hbar[a][b], a) * db(u, b);
  Sinner = Sinner + u * dbs(N);
  F Sterm = KNu * (-1.0 * Sinner);

  F Tterm = C::lift(0.0);
  for (int b = 1; b <= 2; ++b) {
    F inner = C::lift(0.0);
    for (int a = 1; a <= 2; ++a) {
      inner = inner + u * gbar[a][b] * db(N, a);
      inner = inner + s * gbar[a][b] * db(hbar[0][0], a) * dbs(u);
    }
    Tterm = Tterm + s * db(u, b) * (-1.0 * inner);
  }

  rep.max_residual = std::max(
      rep.max_residual,
      std::fabs(c.eval(lhs - rhs - Rterm - Sterm - Tterm)));
  rep.max_N_minus_1 =
      std::max(rep.max_N_minus_1, std::fabs(c.eval(N - 1.0)));
  rep.max_R_term = std::max(rep.max_R_term, std::fabs(c.eval(Rterm)));
  rep.max_S_term = std::max(rep.max_S_term, std::fabs(c.eval(Sterm)));
  rep.max_T_term = std::max(rep.max_T_term, std::fabs(c.eval(Tterm)));
}

void check_point(const ConePoint& p) {
  if (!p.inside_cone() || p.s() / p.t() < 0.05)
    throw std::domain_error("sample point outside K or too close to cone");
}

}  // namespace

double verify_box_decomposition(const TestField& f,
                                const std::vector<ConePoint>& points,
                                DerivMode mode, bool corrupt_sign) {
  double worst = 0.0;
  for (const ConePoint& p : points) {
    check_point(p);
    double r;
    if (mode.analytic) {
      JetCalc c(p);
      r = box_residual(c, c.field(f), corrupt_sign);
    } else {
      FdCalc c(p, mode.h);
      r = box_residual(c, c.field(f), corrupt_sign);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

std::map<std::string, double> verify_commutators(
    const TestField& f, const std::vector<ConePoint>& points,
    DerivMode mode) {
  std::map<std::string, double> out = {{"boost_dt", 0.0},
                                       {"boost_dx", 0.0},
                                       {"boost_boost", 0.0},
                                       {"hessian_ta", 0.0},
                                       {"hessian_ab", 0.0}};
  for (const ConePoint& p : points) {
    if (!p.inside_cone())
      throw std::domain_error("sample point outside the cone");
    if (mode.analytic) {
      JetCalc c(p);
      comm_residuals(c, c.field(f), out);
    } else {
      FdCalc c(p, mode.h);
      comm_residuals(c, c.field(f), out);
    }
  }
  return out;
}

CurvedMetricData CurvedMetricData::zero() {
  CurvedMetricData d;
  for (auto& row : d.h)
    for (auto& f : row) f = [](const PointJets&) { return Jet(0.0); };
  return d;
}

CurvedIdentityReport verify_conformal_identity_curved(
    const TestField& f, const CurvedMetricData& hdata,
    const std::vector<ConePoint>& points, DerivMode mode) {
  CurvedIdentityReport rep;
  for (const ConePoint& p : points) {
    check_point(p);
    if (mode.analytic) {
      JetCalc c(p);
      curved_residual(c, c.field(f), hdata, rep);
    } else {
      FdCalc c(p, mode.h);
      curved_residual(c, c.field(f), hdata, rep);
    }
  }
  return rep;
}

double verify_conformal_identity_flat(const TestField& f,
                                      const std::vector<ConePoint>& points,
                                      DerivMode mode) {
  return verify_conformal_identity_curved(f, CurvedMetricData::zero(), points,
                                          mode)
      .max_residual;
}

// ---- monitors ---------------------------------------------------------------

double monitor_hessian_bound(const std::vector<HessianSample>& samples,
                             double floor) {
  double c = 0.0;
  for (const auto& r : samples) {
    double st = r.s / r.t;
    double denom = r.abs_box + r.abs_du_11 / r.t + floor;
    c = std::max(c, st * st * r.abs_dd / denom);
  }
  return c;
}

double monitor_kg_fast_decay(const std::vector<KgFastSample>& samples,
                             double cmass, double floor) {
  double c = 0.0;
  for (const auto& r : samples) {
    double st = r.s / r.t;
    double denom = st * st * r.abs_dv_11 + r.abs_f + floor;
    c = std::max(c, cmass * cmass * r.abs_v / denom);
  }
  return c;
}

// ---- combined reporting -----------------------------------------------------

IdentityReport identity_report(const std::string& which, const TestField& f,
                               const std::vector<ConePoint>& points,
                               double h_fd) {
  auto run = [&](DerivMode mode) -> double {
    if (which == "box") return verify_box_decomposition(f, points, mode);
    if (which == "conformal_flat")
      return verify_conformal_identity_flat(f, points, mode);
    if (which == "commutators") {
      double worst = 0.0;
      for (auto& [k, v] : verify_commutators(f, points, mode))
        worst = std::max(worst, v);
      return worst;
    }
    throw std::invalid_argument("unknown identity: " + which);
  };
  IdentityReport rep;
  rep.max_residual_analytic = run(DerivMode::exact());
  rep.max_residual_fd_h = run(DerivMode::fd(h_fd));
  rep.max_residual_fd_h2 = run(DerivMode::fd(h_fd / 2));
  rep.ratio =
      rep.max_residual_fd_h / std::max(rep.max_residual_fd_h2, 1e-300);
  return rep;
}

}  // namespace wkg
