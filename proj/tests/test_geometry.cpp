#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wkg/geometry.hpp"

using namespace wkg;

TEST_CASE("cone membership factory") {
  CHECK_NOTHROW(ConePoint::in_cone(5.0, 3.0, 0.0));
  CHECK_THROWS_AS(ConePoint::in_cone(2.0, 1.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(ConePoint::in_cone(4.0, 3.0, 0.0),
                  std::domain_error);  // t = r + 1 boundary excluded
  ConePoint p = ConePoint::in_cone(5.0, 3.0, 0.0);
  CHECK(p.r() == doctest::Approx(3.0));
  CHECK(p.s() == doctest::Approx(4.0));
}

TEST_CASE("frame matrices at the worked point (5,3,0)") {
  ConePoint p = ConePoint::in_cone(5.0, 3.0, 0.0);
  FrameMatrices hy = frame_at(p, FrameKind::hyperbolic);
  CHECK(hy.phi(0, 0) == doctest::Approx(0.8));   // s/t
  CHECK(hy.phi(1, 0) == doctest::Approx(0.6));   // x1/t
  CHECK(hy.psi(0, 0) == doctest::Approx(1.25));  // t/s
  CHECK(hy.psi(1, 0) == doctest::Approx(-0.75)); // -x1/s

  FrameMatrices se = frame_at(p, FrameKind::semi);
  CHECK(se.phi(0, 0) == doctest::Approx(1.0));
  CHECK(se.phi(1, 0) == doctest::Approx(0.6));
  CHECK(se.psi(1, 0) == doctest::Approx(-0.6));
}

TEST_CASE("phi psi = identity at many random points") {
  auto pts = random_cone_points(10000, 71u);
  Mat3 id = Mat3::identity();
  double worst = 0.0;
  for (const auto& p : pts) {
    for (FrameKind k : {FrameKind::hyperbolic, FrameKind::semi}) {
      FrameMatrices f = frame_at(p, k);
      worst = std::max(worst, mat_max_abs_diff(mat_mul(f.phi, f.psi), id));
      worst = std::max(worst, mat_max_abs_diff(mat_mul(f.psi, f.phi), id));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("frame metrics match closed forms and the contraction oracle") {
  auto pts = random_cone_points(500, 5u);
  pts.push_back(ConePoint::in_cone(5.0, 3.0, 0.0));
  for (const auto& p : pts) {
    for (FrameKind k : {FrameKind::hyperbolic, FrameKind::semi}) {
      FrameMetric g = metric_in_frame(p, k);
      Mat3 oracle = metric_by_contraction(p, k);
      CHECK(mat_max_abs_diff(g.upper, oracle) < 1e-11);
      // upper and lower components are mutually inverse
      Mat3 prod = mat_mul(g.upper, g.lower);
      CHECK(mat_max_abs_diff(prod, Mat3::identity()) < 1e-10);
    }
  }
  // spot values at (5,3,0): s/t = 0.8
  ConePoint p = ConePoint::in_cone(5.0, 3.0, 0.0);
  FrameMetric se = metric_in_frame(p, FrameKind::semi);
  CHECK(se.upper(0, 0) == doctest::Approx(0.64));
  CHECK(se.upper(0, 1) == doctest::Approx(0.6));
  CHECK(se.lower(0, 0) == doctest::Approx(1.0));
  CHECK(se.lower(1, 1) == doctest::Approx(0.36 - 1.0));
  FrameMetric hy = metric_in_frame(p, FrameKind::hyperbolic);
  CHECK(hy.upper(0, 0) == doctest::Approx(1.0));
  CHECK(hy.upper(0, 1) == doctest::Approx(0.75));  // x1/s
  CHECK(hy.upper(1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("tensor transform round trip") {
  auto pts = random_cone_points(200, 9u);
  Mat3 T;
  int v = 1;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) T.m[i][j] = v++ * 0.37 - 1.1;
  for (const auto& p : pts)
    for (FrameKind k : {FrameKind::hyperbolic, FrameKind::semi}) {
      Mat3 back = tensor_from_frame(tensor_to_frame(T, p, k), p, k);
      CHECK(mat_max_abs_diff(back, T) < 1e-11);
    }
}

TEST_CASE("semi-hyperboloidal derivative annihilates t - leaves x alone") {
  auto pts = random_cone_points(100, 3u);
  for (const auto& p : pts) {
    PointJets pj(p);
    // under_a t = x^a/t ; under_a x^b = delta_ab
    for (int a = 1; a <= 2; ++a) {
      CHECK(op_under(pj, pj.t, a).value() ==
            doctest::Approx(p.x(a) / p.t()).epsilon(1e-13));
      CHECK(op_under(pj, pj.x1, a).value() == doctest::Approx(a == 1 ? 1 : 0));
      CHECK(op_under(pj, pj.x2, a).value() == doctest::Approx(a == 2 ? 1 : 0));
      // under_a = t^{-1} L_a as operators
      Jet f = jet_sin(pj.x1 * 0.3) * pj.t + pj.x2 * pj.x2;
      CHECK(op_under(pj, f, a).value() ==
            doctest::Approx(op_boost(pj, f, a).value() / p.t())
                .epsilon(1e-12));
    }
    // dbar_s s = 1:  (s/t) dt sqrt(t^2-r^2) = (s/t)(t/s) = 1
    CHECK(op_dbar_s(pj, pj.s()).value() == doctest::Approx(1.0));
    // L_a (s/t) = -(x^a/t)(s/t)
    for (int a = 1; a <= 2; ++a)
      CHECK(op_boost(pj, pj.st(), a).value() ==
            doctest::Approx(-(p.x(a) / p.t()) * p.s() / p.t())
                .epsilon(1e-12));
  }
}

TEST_CASE("scaling field on s powers") {
  // K s^m = m s^m (s/t) * t/s * s ... verify on f = s^2: K(s^2) = 2 s^2?
  // K = s(s/t)dt + 2x^a under_a; under_a s^2 = (x^a/t)(2t) + (-2x^a) = 0,
  // so K s^2 = s(s/t)(2t) = 2 s^2.
  auto pts = random_cone_points(100, 13u);
  for (const auto& p : pts) {
    PointJets pj(p);
    CHECK(op_scaling_k(pj, pj.s2()).value() ==
          doctest::Approx(2.0 * p.s() * p.s()).epsilon(1e-12));
    // K annihilates s/t? No: under_a(s/t) = 0 since s/t is constant along
    // hyperboloid radial flow?  Check numerically against jets instead.
    Jet kst = op_scaling_k(pj, pj.st());
    double st = p.s() / p.t();
    // s(s/t) dt(s/t) = s(s/t)(1/s - s/t^2)... just assert consistency with
    // the explicit formula below.
    double dt_st = p.t() / p.s() / p.t() - p.s() / (p.t() * p.t());
    double expect = p.s() * st * dt_st;
    for (int a = 1; a <= 2; ++a) {
      double under_st =
          (p.x(a) / p.t()) * dt_st + (-p.x(a) / p.s() / p.t());
      expect += 2.0 * p.x(a) * under_st;
    }
    CHECK(kst.value() == doctest::Approx(expect).epsilon(1e-11));
  }
}

TEST_CASE("weight bounds: worked example l=1 n=0 word=L1 at (5,3,0)") {
  std::vector<ConePoint> pts = {ConePoint::in_cone(5.0, 3.0, 0.0)};
  FieldWord w = FieldWord::parse("L1");
  StBoundReport rep = st_bound_check(1, 0, w, pts);
  // L1 (s/t) = -(x1/t)(s/t) = -0.48, bound (s/t) = 0.8 -> ratio 0.6
  CHECK(rep.max_ratio == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(rep.satisfied);
}

TEST_CASE("weight bounds hold for all words of order <= 2, |l|,|n| <= 2") {
  auto pts = random_cone_points(400, 21u, 0.02);
  const char* syms[] = {"d0", "d1", "d2", "L1", "L2", "u1", "u2"};
  std::vector<std::string> words = {""};
  for (const char* a : syms) words.push_back(a);
  for (const char* a : syms)
    for (const char* b : syms) words.push_back(std::string(a) + " " + b);
  double global_worst = 0.0;
  for (int l = -2; l <= 2; ++l)
    for (int n = -2; n <= 2; ++n)
      for (const auto& wtext : words) {
        FieldWord w = FieldWord::parse(wtext);
        StBoundReport rep = st_bound_check(l, n, w, pts);
        INFO("l=", l, " n=", n, " word='", wtext, "' ratio=", rep.max_ratio);
        CHECK(rep.satisfied);
        global_worst = std::max(global_worst, rep.max_ratio);
      }
  MESSAGE("observed supremum of ratios: ", global_worst);
  CHECK(global_worst > 0.0);
}

TEST_CASE("hyperbolic frame rejects near-cone points") {
  ConePoint p(10.0, 10.0 * std::sqrt(1.0 - 1e-20), 0.0);  // s/t ~ 1e-10
  CHECK_THROWS_AS(frame_at(p, FrameKind::hyperbolic), std::domain_error);
  CHECK_NOTHROW(frame_at(p, FrameKind::semi));
}
