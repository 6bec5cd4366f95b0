#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "speclab/symbol.hpp"

using namespace speclab;
using namespace speclab::symbols;
using num::Cplx;
using num::CVec2;
using num::Vec2;
using num::Vec2i;

namespace {

const SymbolCaps caps{6, 6, 6};

ClassicalSymbol random_symbol(std::mt19937_64& rng, int k_range, int max_deg, int n_terms) {
  std::uniform_int_distribution<int> ki(-k_range, k_range), deg(0, max_deg);
  std::uniform_real_distribution<double> u(-1, 1);
  ClassicalSymbol s(caps);
  for (int t = 0; t < n_terms; ++t) {
    int d = deg(rng);
    std::uniform_int_distribution<int> split(0, d);
    int a1 = split(rng);
    int rest = d - a1;
    std::uniform_int_distribution<int> split2(0, rest);
    int a2 = split2(rng);
    int m = rest - a2;
    s.accumulate(SymbolKey{{ki(rng), ki(rng)}, {a1, a2}, m}, Cplx(u(rng), u(rng)));
  }
  return s;
}

// Brute-force oracle for p o exp(H_G): evaluates the bracket series numerically
// at a point by nested finite differences is hopeless; instead re-expand the
// series independently with a straightforward (unoptimized) term recursion and
// compare coefficient maps.
ClassicalSymbol brute_force_compose(const ClassicalSymbol& p, const ClassicalSymbol& G, int deg) {
  ClassicalSymbol sum = p.truncate_degree(deg);
  ClassicalSymbol term = sum;
  double fact = 1.0;
  for (int k = 1; k <= deg + 2; ++k) {
    // H_G f = sum_j d_xi_j G * d_x_j f - d_x_j G * d_xi_j f, written out directly.
    ClassicalSymbol next(term.caps());
    for (int j = 0; j < 2; ++j) {
      next += G.derivative_xi(j) * term.derivative_x(j);
      next -= G.derivative_x(j) * term.derivative_xi(j);
    }
    term = next.truncate_degree(deg);
    fact *= k;
    if (term.empty()) break;
    sum += term * Cplx(1.0 / fact);
  }
  return sum;
}

double max_coeff_diff(const ClassicalSymbol& a, const ClassicalSymbol& b) {
  return (a - b).max_abs_coeff();
}

}  // namespace

TEST_CASE("evaluate: constants, modes, linear forms") {
  auto one = ClassicalSymbol::constant(caps, 1.0);
  CHECK(one.evaluate(Vec2{0.3, -1.2}, Vec2{0.5, 0.7}, 0.2) == Cplx(1.0));

  auto mode = ClassicalSymbol::monomial(caps, {1, 0}, {0, 0}, 0, 1.0);  // e^{i x1}
  CHECK(std::abs(mode.evaluate(Vec2{0, 0}, Vec2{0, 0}, 0.0) - Cplx(1.0)) < 1e-15);
  CHECK(std::abs(mode.evaluate(Vec2{M_PI, 0}, Vec2{0, 0}, 0.0) - Cplx(-1.0)) < 1e-15);

  // a . xi with a = (1,2) at xi = (0.1, 0.2) -> 0.5
  auto axi = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(2.0);
  CHECK(std::abs(axi.evaluate(Vec2{0, 0}, Vec2{0.1, 0.2}, 0.0) - Cplx(0.5)) < 1e-15);
}

TEST_CASE("poisson bracket: basic identities") {
  auto xi1 = ClassicalSymbol::xi(caps, 0);
  auto mode = ClassicalSymbol::monomial(caps, {1, 0}, {0, 0}, 0, 1.0);
  // {xi1, e^{i x1}} = i e^{i x1}
  auto br = poisson_bracket(xi1, mode);
  CHECK(std::abs(br.coeff(SymbolKey{{1, 0}, {0, 0}, 0}) - Cplx(0, 1)) < 1e-15);
  CHECK(br.size() == 1);

  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    auto f = random_symbol(rng, 2, 3, 8);
    CHECK(poisson_bracket(f, f).max_abs_coeff() < 1e-14);
  }

  // x-independent pair has zero bracket.
  auto g1 = ClassicalSymbol::monomial(caps, {0, 0}, {1, 1}, 0, 1.0);
  auto g2 = ClassicalSymbol::monomial(caps, {0, 0}, {2, 0}, 1, 0.7);
  CHECK(poisson_bracket(g1, g2).max_abs_coeff() < 1e-15);
}

TEST_CASE("poisson bracket: bilinearity and antisymmetry on random symbols") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    auto f = random_symbol(rng, 2, 3, 6);
    auto g = random_symbol(rng, 2, 3, 6);
    auto h = random_symbol(rng, 2, 3, 6);
    Cplx a(0.3, -0.2), b(1.1, 0.4);
    auto lhs = poisson_bracket(f * a + g * b, h);
    auto rhs = poisson_bracket(f, h) * a + poisson_bracket(g, h) * b;
    CHECK(max_coeff_diff(lhs, rhs) < 1e-12);
    auto anti = poisson_bracket(f, g) + poisson_bracket(g, f);
    CHECK(anti.max_abs_coeff() < 1e-12);
  }
}

TEST_CASE("poisson bracket: Jacobi identity within caps") {
  // Small modes and degrees so all intermediates stay within caps.
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 4; ++rep) {
    auto f = random_symbol(rng, 1, 2, 4);
    auto g = random_symbol(rng, 1, 2, 4);
    auto h = random_symbol(rng, 1, 2, 4);
    auto jac = poisson_bracket(f, poisson_bracket(g, h)) +
               poisson_bracket(g, poisson_bracket(h, f)) +
               poisson_bracket(h, poisson_bracket(f, g));
    double scale = std::max({f.max_abs_coeff(), g.max_abs_coeff(), h.max_abs_coeff(), 1.0});
    CHECK(jac.max_abs_coeff() < 1e-11 * scale * scale * scale);
  }
}

TEST_CASE("torus average: projection and triviality") {
  auto s = ClassicalSymbol::constant(caps, 1.0) +
           ClassicalSymbol::monomial(caps, {1, 0}, {0, 0}, 0, 1.0);
  auto avg = s.torus_average();
  CHECK(avg.size() == 1);
  CHECK(avg.coeff(SymbolKey{}) == Cplx(1.0));

  auto pure = ClassicalSymbol::monomial(caps, {2, -1}, {1, 0}, 0, Cplx(0, 3));
  CHECK(pure.torus_average().empty());

  // Idempotence.
  std::mt19937_64 rng(17);
  auto r = random_symbol(rng, 3, 3, 12);
  CHECK(max_coeff_diff(r.torus_average().torus_average(), r.torus_average()) == 0.0);
}

TEST_CASE("torus average kills brackets with x-independent first argument") {
  std::mt19937_64 rng(19);
  auto p = ClassicalSymbol::xi(caps, 0) * Cplx(1.0) + ClassicalSymbol::xi(caps, 1) * Cplx(M_SQRT2) +
           ClassicalSymbol::monomial(caps, {0, 0}, {2, 0}, 0, 0.5);
  for (int rep = 0; rep < 5; ++rep) {
    auto G = random_symbol(rng, 2, 3, 8);
    auto br = poisson_bracket(p, G);
    CHECK(br.torus_average().max_abs_coeff() < 1e-13);
  }
}

TEST_CASE("exp_hamiltonian_compose: identity, single bracket, grading") {
  auto p = ClassicalSymbol::xi(caps, 0);
  SUBCASE("zero generator is the identity") {
    auto id = exp_hamiltonian_compose(p, ClassicalSymbol::zero(caps), 4);
    CHECK(max_coeff_diff(id, p) == 0.0);
  }
  SUBCASE("G = eps^2 sin x1 gives xi1 - eps^2 cos x1") {
    // H_G p = {G, p} = -d_x1 G * d_xi1 p = -eps^2 cos(x1); higher brackets vanish.
    ClassicalSymbol G(caps);
    G.set(SymbolKey{{1, 0}, {0, 0}, 2}, Cplx(0, -0.5));
    G.set(SymbolKey{{-1, 0}, {0, 0}, 2}, Cplx(0, 0.5));
    auto comp = exp_hamiltonian_compose(p, G, 3);
    auto expected = p - ClassicalSymbol::cosine(caps, {1, 0}) * Cplx(1.0) *
                            ClassicalSymbol::monomial(caps, {0, 0}, {0, 0}, 2, 1.0);
    CHECK(max_coeff_diff(comp, expected) < 1e-15);
    // Brute-force series expander agrees.
    CHECK(max_coeff_diff(comp, brute_force_compose(p, G, 3)) < 1e-15);
  }
  SUBCASE("degree filtering: output degree d depends only on input degrees <= d") {
    std::mt19937_64 rng(23);
    auto p_full = random_symbol(rng, 2, 4, 10);
    ClassicalSymbol G(caps);
    G.set(SymbolKey{{1, 1}, {1, 0}, 1}, Cplx(0.3, 0.1));   // degree 2
    G.set(SymbolKey{{-1, -1}, {1, 0}, 1}, Cplx(0.3, -0.1));
    G.set(SymbolKey{{0, 1}, {0, 0}, 3}, Cplx(0.2));        // degree 3
    G.set(SymbolKey{{0, -1}, {0, 0}, 3}, Cplx(0.2));
    const int d = 3;
    auto full = exp_hamiltonian_compose(p_full, G, d).truncate_degree(d);
    auto low = exp_hamiltonian_compose(p_full.truncate_degree(d), G, d).truncate_degree(d);
    CHECK(max_coeff_diff(full, low) < 1e-13);
  }
  SUBCASE("generator with low-degree part is rejected") {
    auto bad = ClassicalSymbol::xi(caps, 0);
    CHECK_THROWS_AS(exp_hamiltonian_compose(p, bad, 3), std::invalid_argument);
  }
}

TEST_CASE("exp_hamiltonian_compose matches brute force on random instances") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 6; ++rep) {
    auto p = random_symbol(rng, 2, 4, 8);
    ClassicalSymbol G(caps);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_int_distribution<int> ki(-1, 1);
    for (int t = 0; t < 4; ++t) {
      int a1 = t % 2, m = 2 - a1 + (t / 2);  // degrees 2 and 3
      G.accumulate(SymbolKey{{ki(rng), ki(rng)}, {a1, 0}, m}, Cplx(u(rng), u(rng)));
    }
    auto ours = exp_hamiltonian_compose(p, G, 4);
    auto brute = brute_force_compose(p, G, 4);
    CHECK(max_coeff_diff(ours, brute) < 1e-12);
  }
}

TEST_CASE("moyal bracket: leading term, antisymmetry, multipliers") {
  auto xi1 = OperatorSymbol(ClassicalSymbol::xi(caps, 0));
  auto mode = OperatorSymbol(ClassicalSymbol::monomial(caps, {1, 0}, {0, 0}, 0, 1.0));
  auto mb = moyal_bracket(xi1, mode, 2);
  auto pb = poisson_bracket(ClassicalSymbol::xi(caps, 0),
                            ClassicalSymbol::monomial(caps, {1, 0}, {0, 0}, 0, 1.0));
  CHECK(max_coeff_diff(mb.term(0), pb) < 1e-15);

  std::mt19937_64 rng(31);
  auto f = OperatorSymbol(random_symbol(rng, 2, 3, 8));
  f.h_terms.push_back(random_symbol(rng, 2, 2, 4));
  auto self = moyal_bracket(f, f, 3);
  CHECK(self.max_abs_coeff() < 1e-13);

  // x-independent multipliers commute at every order.
  auto g1 = OperatorSymbol(ClassicalSymbol::monomial(caps, {0, 0}, {2, 1}, 1, Cplx(1, 2)));
  auto g2 = OperatorSymbol(ClassicalSymbol::monomial(caps, {0, 0}, {0, 3}, 2, Cplx(-0.5, 1)));
  CHECK(moyal_bracket(g1, g2, 4).max_abs_coeff() == 0.0);
}

TEST_CASE("real-on-real flag: preserved by sums, products, brackets") {
  auto c1 = ClassicalSymbol::cosine(caps, {1, 0});
  auto s1 = ClassicalSymbol::sine(caps, {1, -1});
  auto xi = ClassicalSymbol::xi(caps, 1);
  REQUIRE(c1.real_on_real());
  auto sum = c1 + s1;
  CHECK(sum.real_on_real());
  auto prod = c1 * s1;
  CHECK(prod.real_on_real());
  auto br = poisson_bracket(c1 * xi, s1);
  CHECK(br.real_on_real());
  CHECK(br.check_real_on_real());
  // Random real-valued evaluation stays real.
  CHECK(std::abs(prod.evaluate(Vec2{0.7, 1.9}, Vec2{0.2, -0.3}, 0.4).imag()) < 1e-15);
  // Scaling by i clears the flag.
  auto scaled = c1 * Cplx(0, 1);
  CHECK_FALSE(scaled.real_on_real());
}

TEST_CASE("caps: mismatch rejected, truncation recorded") {
  ClassicalSymbol small(SymbolCaps{2, 2, 2});
  ClassicalSymbol other(caps);
  CHECK_THROWS_AS(small + other, cap_mismatch);

  ClassicalSymbol a(SymbolCaps{1, 1, 1});
  a.set(SymbolKey{{1, 0}, {0, 0}, 0}, 1.0);
  auto sq = a * a;  // mode (2,0) exceeds k_max = 1
  CHECK(sq.truncated());
  CHECK(sq.coeff(SymbolKey{{2, 0}, {0, 0}, 0}) == Cplx(0.0));

  CHECK_THROWS_AS(a.set(SymbolKey{{5, 0}, {0, 0}, 0}, 1.0), std::out_of_range);
}

TEST_CASE("json round trip preserves coefficients and caps") {
  std::mt19937_64 rng(37);
  auto s = random_symbol(rng, 3, 4, 15);
  auto back = ClassicalSymbol::from_json(s.to_json());
  CHECK(back.caps() == s.caps());
  CHECK(max_coeff_diff(back, s) == 0.0);

  OperatorSymbol op(s);
  op.h_terms.push_back(random_symbol(rng, 2, 2, 5));
  auto opback = OperatorSymbol::from_json(op.to_json());
  REQUIRE(opback.h_terms.size() == 2);
  CHECK(max_coeff_diff(opback.term(1), op.term(1)) == 0.0);
}
