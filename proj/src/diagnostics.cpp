#include "wkg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace wkg {

namespace {

void require_complete(const HyperboloidSample& sample) {
  if (!sample.complete)
    throw std::invalid_argument("energy requires a complete sample on H*_s");
}

double rec_w(const SampleRecord& r, int field) { return field ? r.v : r.u; }
double rec_dt(const SampleRecord& r, int field) { return field ? r.vt : r.ut; }
double rec_d(const SampleRecord& r, int field, int a) {
  if (field) return a == 1 ? r.dv1 : r.dv2;
  return a == 1 ? r.du1 : r.du2;
}

double cell_area(const HyperboloidSample& s) {
  // the records live on the grid of spacing h; infer h from two records
  for (size_t k = 1; k < s.records.size(); ++k) {
    if (s.records[k].i == s.records[k - 1].i &&
        s.records[k].j == s.records[k - 1].j + 1)
      return std::fabs(s.records[k].x2 - s.records[k - 1].x2);
  }
  throw std::invalid_argument("sample too small to carry a grid spacing");
}

// 2x2 / 3x3 normal-equation solvers for the decay fits
bool solve3(double M[3][3], double rhs[3], double out[3]) {
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(M[r][c]) > std::fabs(M[p][c])) p = r;
    if (std::fabs(M[p][c]) < 1e-14) return false;
    std::swap(M[p], M[c]);
    std::swap(rhs[p], rhs[c]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      double f = M[r][c] / M[c][c];
      for (int k = c; k < 3; ++k) M[r][k] -= f * M[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (int c = 0; c < 3; ++c) out[c] = rhs[c] / M[c][c];
  return true;
}

}  // namespace

double energy_standard(const HyperboloidSample& sample, double c, int field) {
  require_complete(sample);
  double h2 = cell_area(sample);
  h2 *= h2;
  double acc = 0.0;
  for (const auto& r : sample.records) {
    double w = rec_w(r, field), dt = rec_dt(r, field);
    double d1 = rec_d(r, field, 1), d2 = rec_d(r, field, 2);
    double e1 = dt * dt + d1 * d1 + d2 * d2 +
                2.0 * (r.x1 / r.t) * dt * d1 + 2.0 * (r.x2 / r.t) * dt * d2 +
                c * c * w * w;
    double u1 = d1 + (r.x1 / r.t) * dt, u2 = d2 + (r.x2 / r.t) * dt;
    double st = sample.s / r.t;
    double e2 = u1 * u1 + u2 * u2 + st * st * dt * dt + c * c * w * w;
    if (std::fabs(e1 - e2) > 1e-12 * std::max(1.0, std::fabs(e1))) {
      std::ostringstream os;
      os << "energy density forms disagree at x = (" << r.x1 << ", " << r.x2
         << "): " << e1 << " vs " << e2;
      throw std::runtime_error(os.str());
    }
    acc += e1;
  }
  return acc * h2;
}

double energy_standard_tower(const DerivativeTower& tower, int order,
                             double c, int field) {
  double h2 = tower.h * tower.h;
  double total = 0.0;
  for (const FieldWord& w : tower_words(order)) {
    int len = (int)w.symbols.size();
    double acc = 0.0;
    for (const auto& p : tower.pts) {
      if (p.order < std::min(3, len + 1)) continue;
      Jet f = tower.word_jet(p, field, w);
      double dt = f.deriv(1, 0, 0);
      double d1 = f.deriv(0, 1, 0), d2 = f.deriv(0, 0, 1);
      double u1 = d1 + (p.x1 / p.t) * dt, u2 = d2 + (p.x2 / p.t) * dt;
      double st = tower.s / p.t;
      double val = f.value();
      acc += u1 * u1 + u2 * u2 + st * st * dt * dt + c * c * val * val;
    }
    total += acc * h2;
  }
  return total;
}

ConformalEnergy energy_conformal(const HyperboloidSample& sample, int field) {
  require_complete(sample);
  double h2 = cell_area(sample);
  h2 *= h2;
  ConformalEnergy out;
  out.ku_plus_u.reserve(sample.records.size());
  double s = sample.s;
  for (const auto& r : sample.records) {
    double w = rec_w(r, field), dt = rec_dt(r, field);
    double u1 = rec_d(r, field, 1) + (r.x1 / r.t) * dt;
    double u2 = rec_d(r, field, 2) + (r.x2 / r.t) * dt;
    double kw = s * (s / r.t) * dt + 2.0 * (r.x1 * u1 + r.x2 * u2);
    double q = kw + w;
    out.ku_plus_u.push_back(q);
    out.value += q * q + s * s * (u1 * u1 + u2 * u2);
  }
  out.value *= h2;
  return out;
}

double norm_st(const HyperboloidSample& sample, int field) {
  require_complete(sample);
  double h2 = cell_area(sample);
  h2 *= h2;
  double acc = 0.0;
  for (const auto& r : sample.records) {
    double q = (sample.s / r.t) * rec_w(r, field);
    acc += q * q;
  }
  return std::sqrt(acc * h2);
}

double norm_s_st2_grad(const HyperboloidSample& sample, int field) {
  require_complete(sample);
  double h2 = cell_area(sample);
  h2 *= h2;
  double worst = 0.0;
  for (int alpha = 0; alpha < 3; ++alpha) {
    double acc = 0.0;
    for (const auto& r : sample.records) {
      double d = alpha == 0 ? rec_dt(r, field) : rec_d(r, field, alpha);
      double st = sample.s / r.t;
      double q = sample.s * st * st * d;
      acc += q * q;
    }
    worst = std::max(worst, std::sqrt(acc * h2));
  }
  return worst;
}

void EnergySeries::validate() const {
  for (size_t k = 0; k < rows.size(); ++k) {
    const EnergyRecord& r = rows[k];
    if (k > 0 && !(r.s > rows[k - 1].s))
      throw std::invalid_argument("energy series: s must strictly increase");
    for (double v : {r.s, r.E_std_u[0], r.E_std_u[1], r.E_std_u[2],
                     r.E_std_v[0], r.E_std_v[1], r.E_std_v[2], r.E_con,
                     r.Fcon, r.sobolev_ratio, r.norm_st_u,
                     r.norm_s_st2_du})
      if (!std::isfinite(v))
        throw std::invalid_argument("energy series: non-finite entry");
    for (double v : {r.E_std_u[0], r.E_std_v[0], r.E_con})
      if (v < 0)
        throw std::invalid_argument("energy series: negative energy");
  }
}

void fcon_accumulate(EnergySeries& series, double initial_norm) {
  if (series.rows.empty())
    throw std::invalid_argument("fcon: empty series");
  series.validate();
  double integral = 0.0;
  for (size_t k = 0; k < series.rows.size(); ++k) {
    EnergyRecord& r = series.rows[k];
    if (k > 0) {
      const EnergyRecord& p = series.rows[k - 1];
      double fp = std::sqrt(p.E_con) / p.s;
      double fc = std::sqrt(r.E_con) / r.s;
      integral += 0.5 * (fp + fc) * (r.s - p.s);
    }
    r.Fcon = initial_norm + std::sqrt(r.E_con) + integral;
  }
}

SobolevRatio sobolev_ratio(const DerivativeTower& tower, int field) {
  double h2 = tower.h * tower.h;
  double denom = 0.0;
  for (const FieldWord& w : tower_words(2)) {
    int len = (int)w.symbols.size();
    double acc = 0.0;
    for (const auto& p : tower.pts) {
      if (p.order < std::max(1, len)) continue;
      double v = tower.word_value(p, field, w);
      acc += v * v;
    }
    denom += acc * h2;
  }
  SobolevRatio out;
  if (denom == 0.0) return out;  // zero field, by convention
  for (const auto& p : tower.pts) {
    double w = (field ? p.v : p.u).value();
    double num = (w / p.t) * (w / p.t);
    if (num / denom > out.ratio) {
      out.ratio = num / denom;
      out.x1 = p.x1;
      out.x2 = p.x2;
    }
  }
  return out;
}

DecayFit fit_decay(const std::vector<RaySample>& samples, DecayModel model) {
  // collect usable points: all, unless the signal crosses zero, in which
  // case the envelope of |value| local maxima
  std::vector<RaySample> use;
  bool crossing = false;
  for (size_t k = 0; k + 1 < samples.size(); ++k)
    if (samples[k].value * samples[k + 1].value <= 0.0) crossing = true;
  if (!crossing) {
    for (const auto& s : samples)
      if (s.value != 0.0) use.push_back(s);
  } else {
    for (size_t k = 1; k + 1 < samples.size(); ++k) {
      double a = std::fabs(samples[k - 1].value);
      double b = std::fabs(samples[k].value);
      double c = std::fabs(samples[k + 1].value);
      if (b > 0.0 && b >= a && b > c) use.push_back(samples[k]);
    }
  }
  if (use.size() < 8)
    throw std::invalid_argument(
        "decay fit needs at least 8 usable points (after envelope "
        "extraction)");
  double tmin = use.front().t, tmax = use.front().t;
  for (const auto& s : use) {
    tmin = std::min(tmin, s.t);
    tmax = std::max(tmax, s.t);
  }
  if (tmax < 2.0 * tmin)
    throw std::invalid_argument("decay fit needs a factor 2 span in t");

  DecayFit fit;
  fit.points_used = (int)use.size();
  if (model == DecayModel::interior) {
    // log|v| = c0 + b log t
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : use) {
      double x = std::log(s.t), y = std::log(std::fabs(s.value));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double n = (double)use.size();
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double c0 = (sy - b * sx) / n;
    fit.b = b;
    double rss = 0;
    for (const auto& s : use) {
      double e = std::log(std::fabs(s.value)) - c0 - b * std::log(s.t);
      rss += e * e;
    }
    fit.residual = std::sqrt(rss / n);
  } else {
    // log|v| = c0 + a log(1 + |t - r|) + b log t
    double M[3][3] = {}, rhs[3] = {};
    for (const auto& s : use) {
      double basis[3] = {1.0, std::log(1.0 + std::fabs(s.t - s.r)),
                         std::log(s.t)};
      double y = std::log(std::fabs(s.value));
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) M[i][j] += basis[i] * basis[j];
        rhs[i] += basis[i] * y;
      }
    }
    double sol[3];
    if (!solve3(M, rhs, sol))
      throw std::invalid_argument(
          "decay fit: degenerate basis (is the ray at a fixed t - r?)");
    fit.a = sol[1];
    fit.b = sol[2];
    double rss = 0;
    for (const auto& s : use) {
      double e = std::log(std::fabs(s.value)) - sol[0] -
                 sol[1] * std::log(1.0 + std::fabs(s.t - s.r)) -
                 sol[2] * std::log(s.t);
      rss += e * e;
    }
    fit.residual = std::sqrt(rss / (double)use.size());
  }
  return fit;
}

BootstrapVerdict bootstrap_monitor(const EnergySeries& series, double delta,
                                   double budget) {
  series.validate();
  BootstrapVerdict v;
  v.min_margin = 1.0;
  bool any = false;
  for (const auto& r : series.rows) {
    struct Check {
      const char* name;
      double value, bound;
    } checks[3] = {
        {"high", std::sqrt(r.E_std_u[2] + r.E_std_v[2]),
         budget * std::pow(r.s, delta)},
        {"low", std::sqrt(r.E_std_u[0] + r.E_std_v[0]), budget},
        {"conformal", std::sqrt(r.E_con), budget * std::pow(r.s, delta)},
    };
    for (const auto& c : checks) {
      double margin =
          c.bound > 0 ? (c.bound - c.value) / c.bound
                      : (c.value == 0.0 ? 1.0 : -1.0);
      if (!any || margin < v.min_margin) v.min_margin = margin;
      any = true;
      if (c.value > c.bound && v.pass) {
        v.pass = false;
        v.first_violation_s = r.s;
        v.which = c.name;
      }
    }
  }
  return v;
}

double weighted_norm_growth_defect(const EnergySeries& series, double C) {
  series.validate();
  if (series.rows.empty()) return 0.0;
  double defect = -series.rows.front().norm_st_u;  // trivially holds at s0
  double integral = 0.0;
  for (size_t k = 1; k < series.rows.size(); ++k) {
    const EnergyRecord& p = series.rows[k - 1];
    const EnergyRecord& r = series.rows[k];
    integral += 0.5 *
                (std::sqrt(p.E_con) / p.s + std::sqrt(r.E_con) / r.s) *
                (r.s - p.s);
    double bound = series.rows.front().norm_st_u + C * integral;
    defect = std::max(defect, r.norm_st_u - bound);
  }
  return defect;
}

FconConstants fcon_constants(const EnergySeries& series) {
  FconConstants c;
  for (const auto& r : series.rows) {
    if (r.Fcon <= 0) continue;
    c.c_weighted = std::max(c.c_weighted, r.norm_st_u / r.Fcon);
    c.c_gradient = std::max(c.c_gradient, r.norm_s_st2_du / r.Fcon);
  }
  return c;
}

std::string series_csv(const EnergySeries& series) {
  std::string out =
      "s,E_std_u_0,E_std_u_1,E_std_u_2,E_std_v_0,E_std_v_1,E_std_v_2,"
      "E_con,Fcon,sobolev_ratio,norm_st_u,norm_s_st2_du\n";
  char buf[64];
  for (const auto& r : series.rows) {
    double cols[12] = {r.s,          r.E_std_u[0],     r.E_std_u[1],
                       r.E_std_u[2], r.E_std_v[0],     r.E_std_v[1],
                       r.E_std_v[2], r.E_con,          r.Fcon,
                       r.sobolev_ratio, r.norm_st_u, r.norm_s_st2_du};
    for (int k = 0; k < 12; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", cols[k]);
      out += buf;
      out += k == 11 ? '\n' : ',';
    }
  }
  return out;
}

}  // namespace wkg
