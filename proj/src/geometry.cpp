#include "wkg/geometry.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace wkg {

Mat3 Mat3::identity() {
  Mat3 r;
  r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
  return r;
}

Mat3 Mat3::minkowski() {
  Mat3 r;
  r.m[0][0] = 1.0;
  r.m[1][1] = r.m[2][2] = -1.0;
  return r;
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += a.m[i][k] * b.m[k][j];
      r.m[i][j] = acc;
    }
  return r;
}

double mat_max_abs_diff(const Mat3& a, const Mat3& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d = std::max(d, std::fabs(a.m[i][j] - b.m[i][j]));
  return d;
}

ConePoint::ConePoint(double t, double x1, double x2)
    : t_(t), x1_(x1), x2_(x2) {
  r_ = std::hypot(x1, x2);
  double s2 = t * t - r_ * r_;
  s_ = s2 > 0.0 ? std::sqrt(s2) : 0.0;
}

ConePoint ConePoint::in_cone(double t, double x1, double x2) {
  ConePoint p(t, x1, x2);
  if (!p.inside_cone()) {
    std::ostringstream os;
    os << "point (" << t << ", " << x1 << ", " << x2
       << ") lies outside the interior cone t > r + 1";
    throw std::domain_error(os.str());
  }
  return p;
}

namespace {

constexpr double kStFloor = 1e-8;

void require_hyperbolic(const ConePoint& p) {
  if (p.t() <= 0.0 || p.s() <= 0.0 || p.s() / p.t() < kStFloor)
    throw std::domain_error(
        "hyperbolic frame undefined: s/t below 1e-8 (too close to the cone)");
}

void require_semi(const ConePoint& p) {
  if (p.t() <= 0.0)
    throw std::domain_error("semi-hyperboloidal frame requires t > 0");
}

}  // namespace

FrameMatrices frame_at(const ConePoint& p, FrameKind kind) {
  FrameMatrices f;
  f.kind = kind;
  double t = p.t(), x1 = p.x1(), x2 = p.x2();
  if (kind == FrameKind::hyperbolic) {
    require_hyperbolic(p);
    double s = p.s();
    // rows are the frame vectors in the Cartesian basis
    f.phi = Mat3{{{s / t, 0, 0}, {x1 / t, 1, 0}, {x2 / t, 0, 1}}};
    f.psi = Mat3{{{t / s, 0, 0}, {-x1 / s, 1, 0}, {-x2 / s, 0, 1}}};
  } else {
    require_semi(p);
    f.phi = Mat3{{{1, 0, 0}, {x1 / t, 1, 0}, {x2 / t, 0, 1}}};
    f.psi = Mat3{{{1, 0, 0}, {-x1 / t, 1, 0}, {-x2 / t, 0, 1}}};
  }
  return f;
}

FrameMetric metric_in_frame(const ConePoint& p, FrameKind kind) {
  FrameMetric g;
  g.kind = kind;
  double t = p.t(), x1 = p.x1(), x2 = p.x2();
  if (kind == FrameKind::hyperbolic) {
    require_hyperbolic(p);
    double s = p.s();
    g.upper = Mat3{{{1, x1 / s, x2 / s}, {x1 / s, -1, 0}, {x2 / s, 0, -1}}};
    // Lowered components have no compact printed form in common use; push
    // m_{alpha beta} through the phi rows.
    FrameMatrices f = frame_at(p, kind);
    Mat3 mk = Mat3::minkowski();
    Mat3 tmp = mat_mul(f.phi, mk);
    Mat3 phiT;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) phiT.m[i][j] = f.phi.m[j][i];
    g.lower = mat_mul(tmp, phiT);
  } else {
    require_semi(p);
    double st = p.s() / t;
    double a1 = x1 / t, a2 = x2 / t;
    g.upper = Mat3{{{st * st, a1, a2}, {a1, -1, 0}, {a2, 0, -1}}};
    g.lower = Mat3{{{1, a1, a2},
                    {a1, a1 * a1 - 1, a1 * a2},
                    {a2, a1 * a2, a2 * a2 - 1}}};
  }
  return g;
}

Mat3 metric_by_contraction(const ConePoint& p, FrameKind kind) {
  // m^{ab}_frame = psi^T m psi  (contravariant components transform with the
  // columns of psi).
  FrameMatrices f = frame_at(p, kind);
  Mat3 mk = Mat3::minkowski();
  Mat3 psiT;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) psiT.m[i][j] = f.psi.m[j][i];
  return mat_mul(psiT, mat_mul(mk, f.psi));
}

Mat3 tensor_to_frame(const Mat3& T, const ConePoint& p, FrameKind kind) {
  FrameMatrices f = frame_at(p, kind);
  Mat3 r;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double acc = 0.0;
      for (int ap = 0; ap < 3; ++ap)
        for (int bp = 0; bp < 3; ++bp)
          acc += T.m[ap][bp] * f.psi.m[ap][a] * f.psi.m[bp][b];
      r.m[a][b] = acc;
    }
  return r;
}

Mat3 tensor_from_frame(const Mat3& T, const ConePoint& p, FrameKind kind) {
  FrameMatrices f = frame_at(p, kind);
  Mat3 r;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double acc = 0.0;
      for (int ap = 0; ap < 3; ++ap)
        for (int bp = 0; bp < 3; ++bp)
          acc += T.m[ap][bp] * f.phi.m[ap][a] * f.phi.m[bp][b];
      r.m[a][b] = acc;
    }
  return r;
}

std::array<double, 3> underline_rank1(const std::array<double, 3>& v,
                                      const ConePoint& p) {
  FrameMatrices f = frame_at(p, FrameKind::semi);
  std::array<double, 3> r{};
  for (int a = 0; a < 3; ++a)
    for (int ap = 0; ap < 3; ++ap) r[a] += v[ap] * f.psi.m[ap][a];
  return r;
}

Mat3 underline_rank2(const Mat3& T, const ConePoint& p) {
  return tensor_to_frame(T, p, FrameKind::semi);
}

double underline_rank3_component(const double Q[3][3][3], const ConePoint& p,
                                 int a, int b, int g) {
  FrameMatrices f = frame_at(p, FrameKind::semi);
  double acc = 0.0;
  for (int ap = 0; ap < 3; ++ap)
    for (int bp = 0; bp < 3; ++bp)
      for (int gp = 0; gp < 3; ++gp)
        acc += Q[ap][bp][gp] * f.psi.m[ap][a] * f.psi.m[bp][b] *
               f.psi.m[gp][g];
  return acc;
}

Jet op_dt(const Jet& f) { return jet_dt(f); }

Jet op_dx(const Jet& f, int a) { return jet_d(f, a); }

Jet op_boost(const PointJets& pj, const Jet& f, int a) {
  return pj.x(a) * jet_dt(f) + pj.t * jet_d(f, a);
}

Jet op_under(const PointJets& pj, const Jet& f, int a) {
  return (pj.x(a) / pj.t) * jet_dt(f) + jet_d(f, a);
}

Jet op_dbar_s(const PointJets& pj, const Jet& f) {
  return pj.st() * jet_dt(f);
}

Jet op_scaling_k(const PointJets& pj, const Jet& f) {
  Jet r = pj.s() * pj.st() * jet_dt(f);
  for (int a = 1; a <= 2; ++a) r += 2.0 * pj.x(a) * op_under(pj, f, a);
  return r;
}

int FieldWord::count_partials() const {
  int n = 0;
  for (const auto& s : symbols) n += (s[0] == 'd');
  return n;
}
int FieldWord::count_boosts() const {
  int n = 0;
  for (const auto& s : symbols) n += (s[0] == 'L');
  return n;
}
int FieldWord::count_under() const {
  int n = 0;
  for (const auto& s : symbols) n += (s[0] == 'u');
  return n;
}

FieldWord FieldWord::parse(const std::string& text) {
  FieldWord w;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    if (tok != "d0" && tok != "d1" && tok != "d2" && tok != "L1" &&
        tok != "L2" && tok != "u1" && tok != "u2")
      throw std::invalid_argument("unknown vector-field symbol: " + tok);
    w.symbols.push_back(tok);
  }
  return w;
}

Jet apply_word(const PointJets& pj, const FieldWord& word, const Jet& f) {
  Jet g = f;
  // word symbols act right to left, as in an operator product Z_1 Z_2 ... f
  for (auto it = word.symbols.rbegin(); it != word.symbols.rend(); ++it) {
    const std::string& s = *it;
    int idx = s[1] - '0';
    if (s[0] == 'd')
      g = idx == 0 ? jet_dt(g) : jet_d(g, idx);
    else if (s[0] == 'L')
      g = op_boost(pj, g, idx);
    else
      g = op_under(pj, g, idx);
  }
  return g;
}

StBoundReport st_bound_check(int l, int n, const FieldWord& word,
                             const std::vector<ConePoint>& samples,
                             double pass_constant) {
  if ((int)word.symbols.size() > kJetOrder)
    throw std::invalid_argument("word length exceeds jet order 3");
  StBoundReport rep;
  int k = word.count_under();
  int i = word.count_partials();
  for (const ConePoint& p : samples) {
    PointJets pj(p);
    Jet f = jet_powi(pj.st(), l) * jet_powi(pj.t, n);
    double val = apply_word(pj, word, f).value();
    double bound = std::pow(p.t(), n - k) * std::pow(p.s() / p.t(), l);
    if (i >= 1) bound *= p.t() / (p.s() * p.s());
    double ratio = std::fabs(val) / bound;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_t = p.t();
      rep.worst_x1 = p.x1();
      rep.worst_x2 = p.x2();
    }
  }
  rep.satisfied = rep.max_ratio <= pass_constant;
  return rep;
}

std::vector<ConePoint> random_cone_points(int count, unsigned seed,
                                          double st_floor, double t_min,
                                          double t_max) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ut(t_min, t_max);
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * M_PI);
  std::vector<ConePoint> pts;
  pts.reserve(count);
  while ((int)pts.size() < count) {
    double t = ut(rng);
    // r constrained so that both t > r + 1 and s/t >= st_floor hold
    double r_cone = t - 1.0 - 1e-6;
    double r_st = t * std::sqrt(std::max(0.0, 1.0 - st_floor * st_floor));
    double r_max = std::min(r_cone, r_st);
    if (r_max <= 0.0) continue;
    double r = r_max * std::sqrt(uu(rng));
    double th = uth(rng);
    ConePoint p(t, r * std::cos(th), r * std::sin(th));
    if (p.inside_cone() && p.s() / p.t() >= st_floor) pts.push_back(p);
  }
  return pts;
}

}  // namespace wkg
