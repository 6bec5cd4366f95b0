#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "speclab/averaging.hpp"

using namespace speclab;
using namespace speclab::averaging;
using num::Cplx;
using num::Vec2;
using num::Vec2i;
using symbols::ClassicalSymbol;
using symbols::SymbolCaps;
using symbols::SymbolKey;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;
const SymbolCaps caps{8, 4, 4};

ClassicalSymbol torus_mode(Vec2i k, Cplx c) {
  ClassicalSymbol s(caps);
  s.set(SymbolKey{k, {0, 0}, 0}, c);
  s.set(SymbolKey{{-k[0], -k[1]}, {0, 0}, 0}, std::conj(c));
  return s;
}

double sup_on_grid(const ClassicalSymbol& s, int ng = 64) {
  double sup = 0;
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      Vec2 x{2 * M_PI * i / ng, 2 * M_PI * j / ng};
      sup = std::max(sup, std::abs(s.evaluate(x, Vec2{0, 0}, 0.0)));
    }
  return sup;
}

}  // namespace

TEST_CASE("check_diophantine: resonances and the golden ratio") {
  auto rep = check_diophantine(Vec2{1, 2}, 1.0, 2.0, 5);
  CHECK_FALSE(rep.ok);
  CHECK(rep.worst_mode == Vec2i{2, -1});
  CHECK(rep.worst_ratio == 0.0);

  auto golden = check_diophantine(Vec2{1, kPhi}, 2.0, 2.0, 50);
  CHECK(golden.ok);

  auto axis = check_diophantine(Vec2{1, 0}, 1.0, 2.0, 3);
  CHECK_FALSE(axis.ok);
  CHECK(axis.worst_mode == Vec2i{0, 1});

  CHECK_THROWS_AS(certify(Vec2{1, 2}, 1.0, 2.0, 5), std::invalid_argument);
  auto fv = certify(Vec2{1, kPhi}, 2.0, 2.0, 50);
  CHECK(fv.certified_cap == 50);
}

TEST_CASE("smoothing kernels: normalization and transform values") {
  auto K = SmoothingKernel::bump();
  CHECK(std::abs(K.hat(0.0) - 1.0) < 1e-12);
  CHECK(std::abs(K.hat(3.7) - K.hat(-3.7)) < 1e-13);  // even kernel, even transform
  // Cached interpolation agrees with direct quadrature mid-range.
  auto Kwide = SmoothingKernel::bump(6.0, 2.0);
  CHECK(std::abs(Kwide.hat(0.0) - 1.0) < 1e-12);

  auto box = SmoothingKernel::box();
  CHECK(std::abs(box.hat_complex(0.0) - Cplx(1.0)) < 1e-12);
  // (e^{is} - 1)/(is) at s = pi: |.| = 2/pi
  CHECK(std::abs(std::abs(box.hat_complex(M_PI)) - 2.0 / M_PI) < 1e-12);
}

TEST_CASE("flow_average: fixed points and single-mode readout") {
  auto K = SmoothingKernel::bump();
  auto pN = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(kPhi);

  // x-independent symbols are fixed points for every T.
  ClassicalSymbol flat(caps);
  flat.set(SymbolKey{{0, 0}, {2, 0}, 1}, Cplx(0.3, -0.1));
  flat.set(SymbolKey{{0, 0}, {0, 0}, 0}, 2.0);
  auto out = flow_average(flat, pN, 17.0, K);
  CHECK((out - flat).max_abs_coeff() < 1e-15);

  // Single mode e^{i(x1+x2)}: coefficient multiplied by Khat(T (1 + phi)).
  ClassicalSymbol q(caps);
  q.set(SymbolKey{{1, 1}, {0, 0}, 0}, 1.0);
  auto avg = flow_average(q, pN, 10.0, K);
  Cplx expect = K.hat_complex(10.0 * (1.0 + kPhi));
  CHECK(std::abs(avg.coeff(SymbolKey{{1, 1}, {0, 0}, 0}) - expect) < 1e-12);

  // T -> 0+ approaches q in max coefficient norm.
  auto near = flow_average(q, pN, 1e-4, K);
  CHECK((near - q).max_abs_coeff() < 1e-3);

  // x-dependent p_N is rejected.
  auto bad = pN + ClassicalSymbol::cosine(caps, {1, 0});
  CHECK_THROWS_AS(flow_average(q, bad, 1.0, K), std::invalid_argument);
}

TEST_CASE("flow_average decay exponent >= 4 on the Diophantine torus") {
  // Modes ||k||_inf <= 3 with unit-scale coefficients; smooth bump kernel wide
  // enough that the measured slope over one decade clears the threshold.
  auto K = SmoothingKernel::bump(6.0, 2.0);
  auto pN = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(kPhi);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  ClassicalSymbol q(caps);
  for (int k1 = -3; k1 <= 3; ++k1)
    for (int k2 = 0; k2 <= 3; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      Cplx c(u(rng), u(rng));
      q.accumulate(SymbolKey{{k1, k2}, {0, 0}, 0}, c);
      q.accumulate(SymbolKey{{-k1, -k2}, {0, 0}, 0}, std::conj(c));
    }
  auto q0 = q.torus_average();
  std::vector<double> lx, ly;
  for (int i = 0; i <= 8; ++i) {
    double T = 10.0 * std::pow(10.0, i / 8.0);
    auto diff = flow_average(q, pN, T, K) - q0;
    double sup = sup_on_grid(diff, 48);
    REQUIRE(sup > 0);
    lx.push_back(std::log(T));
    ly.push_back(std::log(sup));
  }
  double exponent = -num::ls_slope(lx, ly);
  CHECK(exponent >= 4.0);
}

TEST_CASE("monotone interval stability in T (smoothed ranges nest up to O(S/T))") {
  auto K = SmoothingKernel::bump();
  auto pN = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(kPhi);
  auto q = torus_mode({1, 0}, Cplx(0.5, 0.2)) + torus_mode({1, -1}, Cplx(-0.3, 0.4)) +
           torus_mode({0, 1}, Cplx(0.25, 0.0));
  double sup_q = sup_on_grid(q);
  auto range_of = [&](double T) {
    auto avg = flow_average(q, pN, T, K);
    double lo = 1e300, hi = -1e300;
    const int ng = 96;
    for (int i = 0; i < ng; ++i)
      for (int j = 0; j < ng; ++j) {
        Vec2 x{2 * M_PI * i / ng, 2 * M_PI * j / ng};
        double v = avg.evaluate(x, Vec2{0, 0}, 0.0).real();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    return std::pair<double, double>{lo, hi};
  };
  const double C = 4.0 * sup_q;  // O(1) ||q||_inf fattening constant
  for (double S : {5.0, 10.0}) {
    auto [slo, shi] = range_of(S);
    for (double T : {2 * S, 5 * S, 10 * S}) {
      auto [tlo, thi] = range_of(T);
      CHECK(tlo >= slo - C * S / T);
      CHECK(thi <= shi + C * S / T);
    }
  }
}

TEST_CASE("resonant_average: mode filtering and projection") {
  ClassicalSymbol q(caps);
  q.set(SymbolKey{{1, -1}, {0, 0}, 0}, 1.0);  // resonant for b = (1,1)
  q.set(SymbolKey{{1, 1}, {0, 0}, 0}, 1.0);   // not resonant
  auto res = resonant_average(q, {1, 1});
  CHECK(res.size() == 1);
  CHECK(res.coeff(SymbolKey{{1, -1}, {0, 0}, 0}) == Cplx(1.0));

  ClassicalSymbol q2(caps);
  q2.set(SymbolKey{{1, 0}, {0, 0}, 0}, 1.0);
  CHECK(resonant_average(q2, {1, 0}).empty());

  CHECK_THROWS_AS(resonant_average(q, Vec2i{0, 0}), std::invalid_argument);

  // Projection: applying twice equals applying once.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  ClassicalSymbol r(caps);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<int> ki(-4, 4);
    r.accumulate(SymbolKey{{ki(rng), ki(rng)}, {0, 0}, 0}, Cplx(u(rng), u(rng)));
  }
  auto once = resonant_average(r, {2, 3});
  auto twice = resonant_average(once, {2, 3});
  CHECK((once - twice).max_abs_coeff() == 0.0);
}

TEST_CASE("resonant_average equals the periodic time average (quadrature oracle)") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1, 1);
  ClassicalSymbol q(caps);
  for (int k1 = -3; k1 <= 3; ++k1)
    for (int k2 = -3; k2 <= 3; ++k2)
      q.accumulate(SymbolKey{{k1, k2}, {0, 0}, 0}, Cplx(u(rng), u(rng)));
  const Vec2i b{2, 1};  // coprime; flow x + t b has period 2 pi
  auto res = resonant_average(q, b);
  for (Vec2 x : {Vec2{0.3, 1.1}, Vec2{2.0, 4.5}, Vec2{5.9, 0.2}}) {
    Cplx avg = num::integrate_gl_complex(
                   [&](double t) {
                     return q.evaluate(Vec2{x[0] + t * b[0], x[1] + t * b[1]}, Vec2{0, 0}, 0.0);
                   },
                   0.0, 2 * M_PI, 64, 16) /
               (2 * M_PI);
    CHECK(std::abs(avg - res.evaluate(x, Vec2{0, 0}, 0.0)) < 1e-10);
  }
}

TEST_CASE("q_infinity_range: dichotomy and cosine range") {
  // Certified irrational direction: the degenerate interval {Re qhat(0)}.
  auto fv = certify(Vec2{1, kPhi}, 2.0, 2.0, 30);
  ClassicalSymbol q(caps);
  q.set(SymbolKey{}, Cplx(0.7, 0.0));
  q += torus_mode({1, 0}, Cplx(0.5, 0.1));
  auto point = q_infinity_range(q, fv);
  CHECK(point.measure() == 0.0);
  CHECK(point.lo() == doctest::Approx(0.7).epsilon(1e-12));

  // b = (1,1), q = cos(x1 - x2): range [-1, 1].
  auto c = ClassicalSymbol::cosine(caps, {1, -1});
  auto iv = q_infinity_range(c, Vec2i{1, 1}, 64);
  CHECK(iv.lo() == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(iv.hi() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("q_infinity_range widths decay along a Farey sweep") {
  // Analytic-type coefficient decay rho^{||k||_inf}; widths along omega = m/n
  // must fall faster than (|m|+|n|)^{-4}.
  const double rho = 0.2;
  ClassicalSymbol q(caps);
  for (int k1 = -8; k1 <= 8; ++k1)
    for (int k2 = -8; k2 <= 8; ++k2) {
      if (std::max(std::abs(k1), std::abs(k2)) > 8 || (k1 == 0 && k2 == 0)) continue;
      q.accumulate(SymbolKey{{k1, k2}, {0, 0}, 0},
                   std::pow(rho, std::max(std::abs(k1), std::abs(k2))));
    }
  ClassicalSymbol q8(SymbolCaps{8, 0, 0});
  for (const auto& [key, c] : q.terms()) q8.accumulate(key, c);

  struct Frac { int m, n; };
  std::vector<double> lk, lw;
  for (Frac f : {Frac{1, 2}, Frac{1, 3}, Frac{1, 4}, Frac{1, 5}, Frac{2, 5}}) {
    // omega = m/n corresponds to direction b = (n, m).
    auto iv = q_infinity_range(q8, Vec2i{f.n, f.m}, 128);
    double width = iv.hi() - iv.lo();
    REQUIRE(width > 0);
    lk.push_back(std::log(double(f.m + f.n)));
    lw.push_back(std::log(width));
  }
  CHECK(num::ls_slope(lk, lw) < -4.0);
}

TEST_CASE("harmonic quartic averages and the time-integration oracle") {
  QuarticForm v;
  v.v40 = 1;
  auto quad = harmonic_quartic_average(v);
  CHECK(quad.c20 == doctest::Approx(1.5));
  CHECK(quad.c11 == 0.0);
  CHECK(quad.c02 == 0.0);

  QuarticForm v22;
  v22.v22 = 1;
  auto q2 = harmonic_quartic_average(v22);
  CHECK(q2.c11 == doctest::Approx(1.0));

  // Long-time average of x1^4 along the lambda = (1, sqrt 2) flow from
  // (I1, I2) = (0.3, 0.2): expect (3/2) I1^2 = 0.135 to 1e-3 relative.
  const double I1 = 0.3, l1 = 1.0, T = 1e4;
  const double amp = std::sqrt(2 * I1);
  auto x1_4 = [&](double t) {
    double x = amp * std::cos(l1 * t + 0.37);
    return x * x * x * x;
  };
  double avg = num::integrate_gl(x1_4, 0.0, T, (int)(T / 3), 8) / T;
  CHECK(std::abs(avg - 1.5 * I1 * I1) / (1.5 * I1 * I1) < 1e-3);
}

TEST_CASE("quartic averages match brute-force flow averages for random forms") {
  std::mt19937_64 rng(2027);
  std::uniform_real_distribution<double> u(-1, 1), upos(0.15, 0.45);
  for (int rep = 0; rep < 4; ++rep) {
    QuarticForm v{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const Vec2 lam{1.0, std::sqrt(2.0) + 0.2 * rep};  // non-resonant ratios
    const double I1 = upos(rng), I2 = upos(rng);
    const double t1 = 2 * M_PI * u(rng), t2 = 2 * M_PI * u(rng);
    auto p4 = [&](double t) {
      double x1 = std::sqrt(2 * I1) * std::cos(t1 + lam[0] * t);
      double x2 = std::sqrt(2 * I2) * std::cos(t2 + lam[1] * t);
      return v.v40 * x1 * x1 * x1 * x1 + v.v31 * x1 * x1 * x1 * x2 +
             v.v22 * x1 * x1 * x2 * x2 + v.v13 * x1 * x2 * x2 * x2 +
             v.v04 * x2 * x2 * x2 * x2;
    };
    const double T = 1e4;
    double avg = num::integrate_gl(p4, 0.0, T, (int)(T / 2), 8) / T;
    double predicted = harmonic_quartic_average(v).eval(I1, I2);
    double scale = std::max(std::abs(predicted), 0.05);
    CHECK(std::abs(avg - predicted) <= 1e-3 * scale);
  }
}

TEST_CASE("critical values: endpoints, third value, homogeneity") {
  const Vec2 lam{1.0, std::sqrt(2.0)};
  QuarticForm v;
  v.v40 = 1;
  auto crit = critical_values(lam, v);
  REQUIRE(crit.size() == 2);  // sign condition fails, no A3
  CHECK(crit[0] == doctest::Approx(0.0));
  CHECK(crit[1] == doctest::Approx(1.5));

  // v40 = v04 = 1, v22 = 0, lambda = (1,1): A3 exists and matches the
  // constrained brute-force extremum on the segment lambda . I = 1.
  QuarticForm w;
  w.v40 = w.v04 = 1;
  const Vec2 ones{1.0, 1.0};
  auto crit3 = critical_values(ones, w);
  REQUIRE(crit3.size() == 3);
  auto quad = harmonic_quartic_average(w);
  double best = 1e300, best_t = 0;
  for (int i = 1; i < 100000; ++i) {
    double t = i / 100000.0;
    double val = quad.eval(t, 1.0 - t);
    if (val < best) {
      best = val;
      best_t = t;
    }
  }
  // Newton polish of the interior extremum of a quadratic in t.
  for (int it = 0; it < 60; ++it) {
    double g = (quad.eval(best_t + 1e-6, 1 - best_t - 1e-6) -
                quad.eval(best_t - 1e-6, 1 - best_t + 1e-6)) /
               2e-6;
    double h = (quad.eval(best_t + 1e-4, 1 - best_t - 1e-4) -
                2 * quad.eval(best_t, 1 - best_t) +
                quad.eval(best_t - 1e-4, 1 - best_t + 1e-4)) /
               1e-8;
    if (std::abs(h) < 1e-12) break;
    best_t -= g / h;
  }
  CHECK(crit3[2] == doctest::Approx(quad.eval(best_t, 1 - best_t)).epsilon(1e-8));

  // Homogeneity: critical_values(lambda, c v) = c critical_values(lambda, v).
  QuarticForm w2;
  w2.v40 = 3.0 * w.v40;
  w2.v04 = 3.0 * w.v04;
  auto scaled = critical_values(ones, w2);
  REQUIRE(scaled.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(scaled[i] == doctest::Approx(3.0 * crit3[i]).epsilon(1e-12));
}

TEST_CASE("verify_integrable_condition: separations and margins") {
  auto constant_family = [&](double mu) {
    ClassicalSymbol s(caps);
    s.set(SymbolKey{}, Cplx(mu, 0.0));
    return s;
  };
  auto irrational = [](double) { return TorusFrequency{}; };
  auto rep = verify_integrable_condition(constant_family, irrational, 0.0, 0.1, 1.0, 25);
  CHECK(rep.ok);
  CHECK(rep.margin == doctest::Approx(0.1).epsilon(1e-12));

  auto zero_family = [&](double) { return ClassicalSymbol::zero(caps); };
  auto rep0 = verify_integrable_condition(zero_family, irrational, 0.0, 0.1, 1.0, 10);
  CHECK_FALSE(rep0.ok);

  // A rational slice widens Q_infinity and can break the separation.
  auto mixed_family = [&](double mu) {
    ClassicalSymbol s(caps);
    s.set(SymbolKey{}, Cplx(mu, 0.0));
    s += torus_mode({1, -1}, Cplx(0.4, 0.0));  // resonant for b = (1,1)
    return s;
  };
  auto rational = [](double) { return TorusFrequency{Vec2i{1, 1}}; };
  auto repr = verify_integrable_condition(mixed_family, rational, 0.0, 0.1, 1.0, 25);
  CHECK_FALSE(repr.ok);  // interval [mu - 0.8, mu + 0.8] crosses F0 = 0
  auto reps = verify_integrable_condition(mixed_family, rational, 0.0, 0.9, 1.0, 25);
  CHECK(reps.ok);
  CHECK(reps.margin == doctest::Approx(0.1).epsilon(1e-6));
}
