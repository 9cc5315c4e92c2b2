#include "wkg/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace wkg {

namespace {

constexpr double kNullThreshold = 1e-10;

bool mat_zero(const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (m(i, j) != 0.0) return false;
  return true;
}
bool vec_zero(const Rank1& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }
bool rank3_zero(const Rank3& q) {
  for (auto& a : q)
    for (auto& b : a)
      for (double x : b)
        if (x != 0.0) return false;
  return true;
}

}  // namespace

MultilinearForm MultilinearForm::rank2_raw(const Mat3& raw) {
  MultilinearForm f;
  f.rank_ = 2;
  f.m2_ = raw;
  return f;
}

MultilinearForm MultilinearForm::rank3_raw(const Rank3& raw) {
  MultilinearForm f;
  f.rank_ = 3;
  f.m3_ = raw;
  return f;
}

MultilinearForm MultilinearForm::rank2(const Mat3& raw) {
  return rank2_raw(raw).symmetrized();
}

MultilinearForm MultilinearForm::rank3(const Rank3& raw) {
  return rank3_raw(raw).symmetrized();
}

MultilinearForm MultilinearForm::symmetrized() const {
  MultilinearForm f = *this;
  if (rank_ == 2) {
    // compute each unordered pair once so the result is exactly symmetric
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) {
        double v = 0.5 * (m2_(a, b) + m2_(b, a));
        f.m2_(a, b) = v;
        f.m2_(b, a) = v;
      }
  } else {
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        for (int g = b; g < 3; ++g) {
          double v = (m3_[a][b][g] + m3_[a][g][b] + m3_[b][a][g] +
                      m3_[b][g][a] + m3_[g][a][b] + m3_[g][b][a]) /
                     6.0;
          f.m3_[a][b][g] = f.m3_[a][g][b] = f.m3_[b][a][g] = v;
          f.m3_[b][g][a] = f.m3_[g][a][b] = f.m3_[g][b][a] = v;
        }
  }
  return f;
}

bool MultilinearForm::is_symmetric(double tol) const {
  if (rank_ == 2) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (std::fabs(m2_(a, b) - m2_(b, a)) > tol) return false;
    return true;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int g = 0; g < 3; ++g) {
        double v = m3_[a][b][g];
        if (std::fabs(m3_[a][g][b] - v) > tol ||
            std::fabs(m3_[b][a][g] - v) > tol ||
            std::fabs(m3_[g][b][a] - v) > tol)
          return false;
      }
  return true;
}

double MultilinearForm::eval(const Rank1& xi) const {
  double acc = 0.0;
  if (rank_ == 2) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) acc += m2_(a, b) * xi[a] * xi[b];
  } else {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int g = 0; g < 3; ++g)
          acc += m3_[a][b][g] * xi[a] * xi[b] * xi[g];
  }
  return acc;
}

MultilinearForm& MultilinearForm::operator*=(double s) {
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      m2_(a, b) *= s;
      for (int g = 0; g < 3; ++g) m3_[a][b][g] *= s;
    }
  return *this;
}

NullDecision is_null(const MultilinearForm& form) {
  if (!form.is_symmetric())
    throw std::invalid_argument("is_null: form must be symmetrized");
  // restriction to the cone is a trig polynomial of degree <= rank; it
  // vanishes identically iff it vanishes at 2*rank+1 distinct angles
  int n = 2 * form.rank() + 1;
  NullDecision d;
  for (int m = 0; m < n; ++m) {
    double theta = 2.0 * M_PI * m / n;
    Rank1 xi = {1.0, std::cos(theta), std::sin(theta)};
    double p = form.eval(xi);
    if (std::fabs(p) > d.max_abs_p) {
      d.max_abs_p = std::fabs(p);
      d.witness_theta = theta;
    }
  }
  d.null = d.max_abs_p <= kNullThreshold;
  return d;
}

void CoefficientSet::validate() const {
  auto chk = [](double x, const char* name) {
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string("non-finite coefficient in ") +
                                  name);
  };
  auto chkm = [&](const Mat3& m, const char* name) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) chk(m(i, j), name);
  };
  auto chkv = [&](const Rank1& v, const char* name) {
    for (double x : v) chk(x, name);
  };
  auto chkq = [&](const Rank3& q, const char* name) {
    for (auto& a : q)
      for (auto& b : a)
        for (double x : b) chk(x, name);
  };
  chkq(P1, "P1"); chkq(P3, "P3"); chkq(P5, "P5"); chkq(P7, "P7");
  chkm(P2, "P2"); chkm(P4, "P4"); chkm(P6, "P6"); chkm(P8, "P8");
  chkm(A1, "A1"); chkm(A3, "A3"); chkm(A5, "A5"); chkm(A7, "A7");
  chkv(A2, "A2"); chkv(A4, "A4"); chkv(A6, "A6"); chkv(A8, "A8");
  chkm(B1, "B1"); chkm(B3, "B3");
  chkv(B2, "B2"); chkv(B4, "B4");
  chk(D1, "D1"); chk(D3, "D3"); chk(D5, "D5"); chk(D7, "D7");
  chkv(D2, "D2"); chkv(D6, "D6");
  chk(K1, "K1"); chk(K2, "K2"); chk(c, "c");
  if (!(c > 0.0))
    throw std::invalid_argument("Klein-Gordon mass c must be positive");
}

std::vector<std::string> CoefficientSet::flagged_nonzero() const {
  std::vector<std::string> out;
  if (!vec_zero(A2)) out.push_back("A2");
  if (D1 != 0.0) out.push_back("D1");
  if (!vec_zero(D2)) out.push_back("D2");
  if (D3 != 0.0) out.push_back("D3");
  if (D5 != 0.0) out.push_back("D5");
  if (!vec_zero(D6)) out.push_back("D6");
  if (D7 != 0.0) out.push_back("D7");
  if (!mat_zero(P6)) out.push_back("P6");
  return out;
}

Coupling classify_coupling(const CoefficientSet& co) {
  bool weak = mat_zero(co.B1) && vec_zero(co.B2) && co.K1 == 0.0;
  return weak ? Coupling::weak : Coupling::strong;
}

ClassificationReport theorem1_admissible(const CoefficientSet& co) {
  co.validate();
  ClassificationReport rep;
  rep.coupling = classify_coupling(co);
  if (rep.coupling == Coupling::strong) {
    rep.violations.push_back("coupling is strong (B1, B2 or K1 nonzero)");
    if (mat_zero(co.B1) && vec_zero(co.B2) && co.K1 != 0.0)
      rep.notes.push_back(
          "strong solely because K1 != 0; the stated global-existence "
          "hypothesis names only B1 and B2, while the undifferentiated v^2 "
          "source in the wave equation is marked strong-coupled -- both "
          "verdicts reported");
  }
  rep.null_status["P1"] = is_null(MultilinearForm::rank3(co.P1));
  rep.null_status["P2"] = is_null(MultilinearForm::rank2(co.P2));
  rep.null_status["P3"] = is_null(MultilinearForm::rank3(co.P3));
  rep.null_status["P5"] = is_null(MultilinearForm::rank3(co.P5));
  rep.null_status["A1"] = is_null(MultilinearForm::rank2(co.A1));
  rep.null_status["A3"] = is_null(MultilinearForm::rank2(co.A3));
  rep.null_status["A5"] = is_null(MultilinearForm::rank2(co.A5));
  rep.null_status["A7"] = is_null(MultilinearForm::rank2(co.A7));
  for (const auto& [name, dec] : rep.null_status)
    if (!dec.null) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "%s not null (|p| = %.3e at theta = %.6f)", name.c_str(),
                    dec.max_abs_p, dec.witness_theta);
      rep.violations.push_back(buf);
    }
  for (const auto& name : co.flagged_nonzero())
    rep.violations.push_back(name +
                             " nonzero (zero by the standing assumptions)");
  rep.theorem1_admissible = rep.violations.empty();
  return rep;
}

UnderlinedTensor semi_frame_coefficient(const CoefficientSet& co,
                                        const std::string& which,
                                        const ConePoint& p) {
  if (!p.inside_cone())
    throw std::domain_error("semi_frame_coefficient: point outside the cone");
  UnderlinedTensor out;
  auto scalar = [&](double v) { out.rank = 0; out.scalar = v; };
  auto r1 = [&](const Rank1& v) { out.rank = 1; out.v = underline_rank1(v, p); };
  auto r2 = [&](const Mat3& m) { out.rank = 2; out.m = underline_rank2(m, p); };
  auto r3 = [&](const Rank3& q) {
    out.rank = 3;
    double raw[3][3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int g = 0; g < 3; ++g) raw[a][b][g] = q[a][b][g];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int g = 0; g < 3; ++g)
          out.q[a][b][g] = underline_rank3_component(raw, p, a, b, g);
  };
  if (which == "P1") r3(co.P1);
  else if (which == "P3") r3(co.P3);
  else if (which == "P5") r3(co.P5);
  else if (which == "P7") r3(co.P7);
  else if (which == "P2") r2(co.P2);
  else if (which == "P4") r2(co.P4);
  else if (which == "P6") r2(co.P6);
  else if (which == "P8") r2(co.P8);
  else if (which == "A1") r2(co.A1);
  else if (which == "A3") r2(co.A3);
  else if (which == "A5") r2(co.A5);
  else if (which == "A7") r2(co.A7);
  else if (which == "A2") r1(co.A2);
  else if (which == "A4") r1(co.A4);
  else if (which == "A6") r1(co.A6);
  else if (which == "A8") r1(co.A8);
  else if (which == "B1") r2(co.B1);
  else if (which == "B3") r2(co.B3);
  else if (which == "B2") r1(co.B2);
  else if (which == "B4") r1(co.B4);
  else if (which == "D2") r1(co.D2);
  else if (which == "D6") r1(co.D6);
  else if (which == "D1") scalar(co.D1);
  else if (which == "D3") scalar(co.D3);
  else if (which == "D5") scalar(co.D5);
  else if (which == "D7") scalar(co.D7);
  else if (which == "K1") scalar(co.K1);
  else if (which == "K2") scalar(co.K2);
  else throw std::invalid_argument("unknown coefficient tensor: " + which);
  return out;
}

// ---- serialization ----------------------------------------------------------

namespace {

struct Slot {
  int rank;  // 0 scalar, 1, 2, 3
  double* scalar = nullptr;
  Rank1* v = nullptr;
  Mat3* m = nullptr;
  Rank3* q = nullptr;
};

std::map<std::string, Slot> slot_table(CoefficientSet& co) {
  std::map<std::string, Slot> t;
  auto s0 = [&](const char* n, double& x) { t[n] = {0, &x}; };
  auto s1 = [&](const char* n, Rank1& x) { t[n] = {1, nullptr, &x}; };
  auto s2 = [&](const char* n, Mat3& x) { t[n] = {2, nullptr, nullptr, &x}; };
  auto s3 = [&](const char* n, Rank3& x) {
    t[n] = {3, nullptr, nullptr, nullptr, &x};
  };
  s3("P1", co.P1); s3("P3", co.P3); s3("P5", co.P5); s3("P7", co.P7);
  s2("P2", co.P2); s2("P4", co.P4); s2("P6", co.P6); s2("P8", co.P8);
  s2("A1", co.A1); s2("A3", co.A3); s2("A5", co.A5); s2("A7", co.A7);
  s1("A2", co.A2); s1("A4", co.A4); s1("A6", co.A6); s1("A8", co.A8);
  s2("B1", co.B1); s2("B3", co.B3);
  s1("B2", co.B2); s1("B4", co.B4);
  s0("D1", co.D1); s0("D3", co.D3); s0("D5", co.D5); s0("D7", co.D7);
  s1("D2", co.D2); s1("D6", co.D6);
  s0("K1", co.K1); s0("K2", co.K2);
  s0("c", co.c);
  return t;
}

}  // namespace

CoefficientSet parse_coefficients(const std::string& body) {
  CoefficientSet co;
  auto slots = slot_table(co);
  std::istringstream is(body);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    double value;
    if (!(ls >> key)) continue;  // blank
    if (!(ls >> eq >> value) || eq != "=") {
      std::ostringstream os;
      os << "coefficients line " << lineno
         << ": expected `NAME[.INDEXDIGITS] = float`, got: " << line;
      throw std::invalid_argument(os.str());
    }
    std::string name = key, idx;
    auto dot = key.find('.');
    if (dot != std::string::npos) {
      name = key.substr(0, dot);
      idx = key.substr(dot + 1);
    }
    auto it = slots.find(name);
    if (it == slots.end())
      throw std::invalid_argument("unknown coefficient name: " + name);
    Slot& sl = it->second;
    if ((int)idx.size() != (sl.rank == 0 ? 0 : sl.rank))
      throw std::invalid_argument("coefficient " + name + " needs " +
                                  std::to_string(sl.rank) +
                                  " index digits, got `" + key + "`");
    int d[3] = {0, 0, 0};
    for (size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < '0' || idx[i] > '2')
        throw std::invalid_argument("index digits must be 0..2 in: " + key);
      d[i] = idx[i] - '0';
    }
    switch (sl.rank) {
      case 0: *sl.scalar = value; break;
      case 1: (*sl.v)[d[0]] = value; break;
      case 2: (*sl.m)(d[0], d[1]) = value; break;
      case 3: (*sl.q)[d[0]][d[1]][d[2]] = value; break;
    }
  }
  co.validate();
  return co;
}

std::string serialize_coefficients(const CoefficientSet& coeffs) {
  CoefficientSet copy = coeffs;
  auto slots = slot_table(copy);
  std::ostringstream os;
  char buf[64];
  auto emit = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << key << " = " << buf << "\n";
  };
  emit("c", copy.c);
  for (auto& [name, sl] : slots) {
    if (name == "c") continue;
    switch (sl.rank) {
      case 0:
        if (*sl.scalar != 0.0) emit(name, *sl.scalar);
        break;
      case 1:
        for (int a = 0; a < 3; ++a)
          if ((*sl.v)[a] != 0.0) emit(name + "." + std::to_string(a), (*sl.v)[a]);
        break;
      case 2:
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if ((*sl.m)(a, b) != 0.0)
              emit(name + "." + std::to_string(a) + std::to_string(b),
                   (*sl.m)(a, b));
        break;
      case 3:
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            for (int g = 0; g < 3; ++g)
              if ((*sl.q)[a][b][g] != 0.0)
                emit(name + "." + std::to_string(a) + std::to_string(b) +
                         std::to_string(g),
                     (*sl.q)[a][b][g]);
        break;
    }
  }
  return os.str();
}

// ---- right-hand sides -------------------------------------------------------

double quasilinear_tt_wave(const CoefficientSet& co, const FirstOrder& u,
                           const FirstOrder& v) {
  double p = co.P2(0, 0) * u.u + co.P4(0, 0) * v.u;
  for (int g = 0; g < 3; ++g)
    p += co.P1[0][0][g] * u.du[g] + co.P3[0][0][g] * v.du[g];
  return p;
}

double quasilinear_tt_kg(const CoefficientSet& co, const FirstOrder& u,
                         const FirstOrder& v) {
  double p = co.P6(0, 0) * u.u + co.P8(0, 0) * v.u;
  for (int g = 0; g < 3; ++g)
    p += co.P5[0][0][g] * u.du[g] + co.P7[0][0][g] * v.du[g];
  return p;
}

double rhs_wave(const CoefficientSet& co, const FirstOrder& u,
                const FirstOrder& v, const Mat3& ddu) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double P = co.P2(a, b) * u.u + co.P4(a, b) * v.u;
      for (int g = 0; g < 3; ++g)
        P += co.P1[a][b][g] * u.du[g] + co.P3[a][b][g] * v.du[g];
      acc += P * ddu(a, b);
    }
  for (int a = 0; a < 3; ++a) {
    double A = co.A2[a] * u.u + co.A4[a] * v.u;
    for (int b = 0; b < 3; ++b)
      A += co.A1(a, b) * u.du[b] + co.A3(a, b) * v.du[b];
    acc += A * u.du[a];
  }
  double D = co.D1 * u.u + co.D3 * v.u;
  for (int a = 0; a < 3; ++a) D += co.D2[a] * v.du[a];
  acc += D * u.u;
  for (int a = 0; a < 3; ++a) {
    double B = co.B2[a] * v.u;
    for (int b = 0; b < 3; ++b) B += co.B1(a, b) * v.du[b];
    acc += B * v.du[a];
  }
  acc += co.K1 * v.u * v.u;
  return acc;
}

double rhs_kg(const CoefficientSet& co, const FirstOrder& u,
              const FirstOrder& v, const Mat3& ddv) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double P = co.P6(a, b) * u.u + co.P8(a, b) * v.u;
      for (int g = 0; g < 3; ++g)
        P += co.P5[a][b][g] * u.du[g] + co.P7[a][b][g] * v.du[g];
      acc += P * ddv(a, b);
    }
  for (int a = 0; a < 3; ++a) {
    double A = co.A6[a] * u.u + co.A8[a] * v.u;
    for (int b = 0; b < 3; ++b)
      A += co.A5(a, b) * u.du[b] + co.A7(a, b) * v.du[b];
    acc += A * u.du[a];
  }
  double D = co.D5 * u.u + co.D7 * v.u;
  for (int a = 0; a < 3; ++a) D += co.D6[a] * v.du[a];
  acc += D * u.u;
  for (int a = 0; a < 3; ++a) {
    double B = co.B4[a] * v.u;
    for (int b = 0; b < 3; ++b) B += co.B3(a, b) * v.du[b];
    acc += B * v.du[a];
  }
  acc += co.K2 * v.u * v.u;
  return acc;
}

}  // namespace wkg
