#include "speclab/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace speclab::hamjac {

namespace {

using symbols::SymbolCaps;
using symbols::SymbolKey;

// x-only Fourier series built on ClassicalSymbol keys with alpha = m = 0.
ClassicalSymbol xseries_zero(const SymbolCaps& caps) { return ClassicalSymbol::zero(caps); }

double h2_norm(const ClassicalSymbol& u) {
  double total = 0;
  for (const auto& [key, c] : u.terms()) {
    double k2 = double(key.k[0]) * key.k[0] + double(key.k[1]) * key.k[1];
    double w = (1.0 + k2) * (1.0 + k2);
    total += w * std::norm(c);
  }
  return std::sqrt(total);
}

double pair_h2_norm(const ClassicalSymbol& u1, const ClassicalSymbol& u2) {
  double a = h2_norm(u1), b = h2_norm(u2);
  return std::sqrt(a * a + b * b);
}

int ifact(int n) {
  int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

CVec2 PhaseSolution::rho_grad(const Vec2& x) const {
  CVec2 g;
  for (int j = 0; j < 2; ++j)
    g[j] = rho_per.derivative_x(j).evaluate(x, Vec2{0, 0}, 0.0) + b * wstar_grad[j];
  return g;
}

std::string PhaseSolution::to_json() const {
  nlohmann::json j;
  j["xi"] = {xi[0], xi[1]};
  j["b"] = {{"re", b.real()}, {"im", b.imag()}};
  j["residual"] = residual;
  j["iterations"] = iterations;
  j["contraction_history"] = contraction_history;
  j["delta_history"] = delta_history;
  j["smallness_ratio"] = smallness_ratio;
  j["eps"] = eps;
  j["eps_tilde"] = eps_tilde;
  j["rho_per"] = nlohmann::json::parse(rho_per.to_json());
  return j.dump(2);
}

PhaseSolution hj_solve(const ClassicalSymbol& p_full, const ClassicalSymbol& p_poly,
                       const Vec2& xi, double eps, double eps_tilde, double tol, int max_iter,
                       double smallness_threshold) {
  if (!(p_full.caps() == p_poly.caps())) throw symbols::cap_mismatch();
  if (!(eps > 0) || !(eps_tilde > 0))
    throw std::invalid_argument("hj_solve: eps and eps_tilde must be positive");
  if (p_poly.x_dependent_part().max_abs_coeff() > 0)
    throw std::invalid_argument("hj_solve: p_poly must be x-independent");
  if (num::norm2(xi) > 2.0 * eps_tilde)
    throw std::invalid_argument("hj_solve: base point must satisfy |xi| = O(eps_tilde)");

  ClassicalSymbol r_N = p_full - p_poly;
  r_N.prune();

  // Smallness (per-key sharp version of (eps^M + eps_tilde^N)/(eps min(eps,eps_tilde))).
  double forcing = 0.0;
  for (const auto& [key, c] : r_N.terms())
    forcing += std::abs(c) * std::pow(eps_tilde, key.xi_degree()) * std::pow(eps, key.m);
  const double ratio = forcing / (eps * std::min(eps, eps_tilde));
  PhaseSolution sol;
  sol.xi = xi;
  sol.eps = eps;
  sol.eps_tilde = eps_tilde;
  sol.smallness_ratio = ratio;
  if (ratio > smallness_threshold) throw smallness_violation(ratio, smallness_threshold);

  // Frequency w = p'(xi) + i eps q'_xi and the split l1 = p', l2 = q'.
  const Vec2 x0{0, 0};
  CVec2 w, l1c;
  for (int j = 0; j < 2; ++j) {
    w[j] = p_poly.derivative_xi(j).evaluate(x0, xi, eps);
    l1c[j] = p_poly.derivative_xi(j).evaluate(x0, xi, 0.0);  // l1 = p'(xi)
  }
  CVec2 l2;
  for (int j = 0; j < 2; ++j) l2[j] = (w[j] - l1c[j]) / Cplx(0.0, eps);

  // Dual linear functions y_k with l_j . grad y_k = delta_jk.
  const Cplx det = l1c[0] * l2[1] - l1c[1] * l2[0];
  if (std::abs(det) < 1e-12)
    throw std::invalid_argument("hj_solve: d_xi p and d_xi q are linearly dependent at xi");
  CVec2 c1{l2[1] / det, -l2[0] / det};   // grad y_1
  CVec2 c2{-l1c[1] / det, l1c[0] / det}; // grad y_2
  sol.wstar_grad = CVec2{0.5 * (eps * c1[0] - Cplx(0, 1) * c2[0]),
                         0.5 * (eps * c1[1] - Cplx(0, 1) * c2[1])};

  // Working caps for x-series: r_N's Fourier cap + 4 (the quadratic term widens
  // the mode support slowly).
  SymbolCaps xcaps{r_N.caps().k_max + 4, 0, 0};

  // Taylor data of r_N around xi: D_beta(x) = (1/beta!) d_xi^beta r_N(., xi, eps).
  std::map<Vec2i, ClassicalSymbol> taylor;  // key = beta
  for (int b1 = 0; b1 <= r_N.caps().n_xi; ++b1) {
    for (int b2 = 0; b1 + b2 <= r_N.caps().n_xi; ++b2) {
      ClassicalSymbol d = r_N;
      for (int r = 0; r < b1; ++r) d = d.derivative_xi(0);
      for (int r = 0; r < b2; ++r) d = d.derivative_xi(1);
      if (d.empty()) continue;
      ClassicalSymbol series = xseries_zero(xcaps);
      for (const auto& [key, c] : d.terms()) {
        Cplx v = c;
        for (int r = 0; r < key.alpha[0]; ++r) v *= xi[0];
        for (int r = 0; r < key.alpha[1]; ++r) v *= xi[1];
        for (int r = 0; r < key.m; ++r) v *= eps;
        series.accumulate(SymbolKey{key.k, {0, 0}, 0}, v);
      }
      series *= Cplx(1.0 / (ifact(b1) * ifact(b2)));
      series.prune();
      if (!series.empty()) taylor[{b1, b2}] = series;
    }
  }

  // Hessian-remainder coefficients: A_{jl,beta} = (1/beta!) d^beta d2_{jl} p_poly (xi,eps)
  //                                             / ((|beta|+1)(|beta|+2)).
  std::map<std::pair<Vec2i, Vec2i>, Cplx> hess;  // ((j,l) packed, beta) -> coeff
  for (int j = 0; j < 2; ++j) {
    for (int l = 0; l < 2; ++l) {
      ClassicalSymbol d2 = p_poly.derivative_xi(j).derivative_xi(l);
      for (int b1 = 0; b1 <= p_poly.caps().n_xi; ++b1) {
        for (int b2 = 0; b1 + b2 <= p_poly.caps().n_xi; ++b2) {
          ClassicalSymbol d = d2;
          for (int r = 0; r < b1; ++r) d = d.derivative_xi(0);
          for (int r = 0; r < b2; ++r) d = d.derivative_xi(1);
          if (d.empty()) continue;
          Cplx v = d.evaluate(x0, xi, eps);
          if (v == Cplx(0.0)) continue;
          int n = b1 + b2;
          v /= double(ifact(b1) * ifact(b2));
          v /= double((n + 1) * (n + 2));
          hess[{Vec2i{j, l}, Vec2i{b1, b2}}] = v;
        }
      }
    }
  }

  auto power = [&](const ClassicalSymbol& base, int p) {
    ClassicalSymbol acc = ClassicalSymbol::constant(xcaps, 1.0);
    for (int r = 0; r < p; ++r) acc = acc * base;
    return acc;
  };

  // G(x) for a given gradient eta(x) = rho'_x (both components as x-series):
  //   (1/et) r_N(x, xi + et eta) + et A(xi, et eta) eta . eta
  auto eval_G = [&](const ClassicalSymbol& eta1, const ClassicalSymbol& eta2) {
    ClassicalSymbol G = xseries_zero(xcaps);
    for (const auto& [beta, series] : taylor) {
      ClassicalSymbol term = series;
      if (beta[0] > 0) term = term * power(eta1, beta[0]);
      if (beta[1] > 0) term = term * power(eta2, beta[1]);
      term *= Cplx(std::pow(eps_tilde, beta[0] + beta[1] - 1));
      G += term;
    }
    const ClassicalSymbol* etas[2] = {&eta1, &eta2};
    for (const auto& [jlbeta, coeff] : hess) {
      const auto& [jl, beta] = jlbeta;
      ClassicalSymbol term = (*etas[jl[0]]) * (*etas[jl[1]]);
      if (beta[0] > 0) term = term * power(eta1, beta[0]);
      if (beta[1] > 0) term = term * power(eta2, beta[1]);
      term *= coeff * std::pow(eps_tilde, beta[0] + beta[1] + 1);
      G += term;
    }
    G.prune();
    return G;
  };

  ClassicalSymbol rho_per = xseries_zero(xcaps);
  Cplx b = 0.0;
  ClassicalSymbol eta1 = xseries_zero(xcaps), eta2 = xseries_zero(xcaps);
  double prev_delta = -1.0;
  ClassicalSymbol prev_eta1 = eta1, prev_eta2 = eta2;

  for (int j = 1; j <= max_iter; ++j) {
    ClassicalSymbol G = eval_G(eta1, eta2);
    Cplx G0 = G.coeff(SymbolKey{});
    Cplx b_next = -G0 / eps;
    ClassicalSymbol rho_next = xseries_zero(xcaps);
    for (const auto& [key, c] : G.terms()) {
      if (key.k[0] == 0 && key.k[1] == 0) continue;
      Cplx div = w[0] * double(key.k[0]) + w[1] * double(key.k[1]);
      if (std::abs(div) < 1e-12 * (std::abs(w[0]) + std::abs(w[1])) * num::norm2(key.k))
        throw degenerate_frequency(key.k);
      rho_next.accumulate(key, -c / (Cplx(0, 1) * div));
    }
    ClassicalSymbol e1_next = rho_next.derivative_x(0);
    ClassicalSymbol e2_next = rho_next.derivative_x(1);
    e1_next.accumulate(SymbolKey{}, b_next * sol.wstar_grad[0]);
    e2_next.accumulate(SymbolKey{}, b_next * sol.wstar_grad[1]);

    double delta = pair_h2_norm(e1_next - eta1, e2_next - eta2);
    sol.delta_history.push_back(delta);
    if (prev_delta > 0 && prev_delta > 1e-300) sol.contraction_history.push_back(delta / prev_delta);
    prev_delta = delta;
    rho_per = rho_next;
    b = b_next;
    eta1 = e1_next;
    eta2 = e2_next;
    sol.iterations = j;
    double scale = std::max(1.0, pair_h2_norm(eta1, eta2));
    if (delta < tol * scale) break;
  }

  // Normalization rho(0, xi) = 0: w*(0) = 0, so shift the constant mode of rho_per.
  Cplx at0 = rho_per.evaluate(x0, Vec2{0, 0}, 0.0);
  rho_per.accumulate(SymbolKey{}, -at0);
  sol.rho_per = rho_per;
  sol.b = b;

  // Residual of the Hamilton-Jacobi equation on an x-grid.
  const Cplx z = p_poly.evaluate(x0, xi, eps);
  const int ng = 4 * (xcaps.k_max + 2);
  double res = 0;
  for (int i1 = 0; i1 < ng; ++i1) {
    for (int i2 = 0; i2 < ng; ++i2) {
      Vec2 x{2 * M_PI * i1 / ng, 2 * M_PI * i2 / ng};
      CVec2 grad = sol.rho_grad(x);
      CVec2 mom{xi[0] + eps_tilde * grad[0], xi[1] + eps_tilde * grad[1]};
      res = std::max(res, std::abs(p_full.evaluate(x, mom, eps) - z));
    }
  }
  sol.residual = res;
  return sol;
}

ActionMap action_map(const std::vector<PhaseSolution>& phases, double x_check_tol) {
  ActionMap map;
  for (const auto& ph : phases) {
    // psi = eps_tilde rho; increments of the periodic part cancel exactly, the
    // grad-periodic part contributes 2 pi b w*'_j. Verify on a few base points.
    auto psi = [&](const Vec2& x) {
      Cplx wstar = ph.wstar_grad[0] * x[0] + ph.wstar_grad[1] * x[1];
      return ph.eps_tilde * (ph.rho_per.evaluate(x, Vec2{0, 0}, 0.0) + ph.b * wstar);
    };
    for (int j = 0; j < 2; ++j) {
      Cplx ref = 0;
      for (int t = 0; t < 4; ++t) {
        Vec2 x{1.1 + 0.7 * t, 0.4 + 1.3 * t};
        Vec2 xs = x;
        xs[j] += 2 * M_PI;
        Cplx inc = psi(xs) - psi(x);
        if (t == 0)
          ref = inc;
        else if (std::abs(inc - ref) > x_check_tol * std::max(1.0, std::abs(ref)))
          throw std::runtime_error("action_map: action increment is x-dependent (unconverged phase)");
      }
    }
    CVec2 eta{Cplx(ph.xi[0]) + ph.eps_tilde * ph.b * ph.wstar_grad[0],
              Cplx(ph.xi[1]) + ph.eps_tilde * ph.b * ph.wstar_grad[1]};
    map.xi.push_back(ph.xi);
    map.eta.push_back(eta);
  }
  return map;
}

Vec2 invert_action(const std::function<PhaseSolution(Vec2)>& solve, const CVec2& eta_target,
                   Vec2 xi_guess, double tol, int max_iter) {
  Vec2 xi = xi_guess;
  for (int it = 0; it < max_iter; ++it) {
    PhaseSolution ph = solve(xi);
    CVec2 eta{Cplx(xi[0]) + ph.eps_tilde * ph.b * ph.wstar_grad[0],
              Cplx(xi[1]) + ph.eps_tilde * ph.b * ph.wstar_grad[1]};
    Cplx r0 = eta[0] - eta_target[0], r1 = eta[1] - eta_target[1];
    double err = std::sqrt(std::norm(r0) + std::norm(r1));
    if (err < tol) return xi;
    // eta = xi + (small), so a damped identity-Jacobian Newton step converges.
    xi[0] -= 0.9 * r0.real();
    xi[1] -= 0.9 * r1.real();
  }
  return xi;
}

}  // namespace speclab::hamjac
