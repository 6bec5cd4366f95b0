#pragma once

// Fixed-point solver for the Hamilton-Jacobi equation p(x, phi'_x, eps) = z(xi,eps)
// with phi = x.xi + eps_tilde rho, rho = rho_per + b w*, plus the action map eta(xi).

#include <functional>
#include <string>
#include <vector>

#include "speclab/symbol.hpp"

namespace speclab::hamjac {

using num::Cplx;
using num::CVec2;
using num::Vec2;
using num::Vec2i;
using symbols::ClassicalSymbol;

class smallness_violation : public std::runtime_error {
 public:
  smallness_violation(double ratio, double threshold)
      : std::runtime_error("Hamilton-Jacobi smallness ratio " + std::to_string(ratio) +
                           " exceeds threshold " + std::to_string(threshold)),
        ratio(ratio) {}
  double ratio;
};

class degenerate_frequency : public std::runtime_error {
 public:
  explicit degenerate_frequency(Vec2i mode)
      : std::runtime_error("divisor (p' + i eps q').k vanishes at mode (" +
                           std::to_string(mode[0]) + "," + std::to_string(mode[1]) + ")"),
        mode(mode) {}
  Vec2i mode;
};

struct PhaseSolution {
  Vec2 xi{0, 0};
  ClassicalSymbol rho_per;               // single-valued part, x-Fourier series (xi,eps frozen)
  Cplx b = 0.0;                          // coefficient of the grad-periodic w* part
  CVec2 wstar_grad{Cplx(0), Cplx(0)};    // constant gradient of w*
  double residual = 0.0;                 // max |p(x, phi'_x, eps) - z| over an x-grid
  int iterations = 0;
  std::vector<double> contraction_history;  // ||d rho'_{j+1}|| / ||d rho'_j||
  std::vector<double> delta_history;         // ||d rho'_j|| per iterate
  double eps = 0, eps_tilde = 0;
  double smallness_ratio = 0.0;

  /// rho'_x at a point (both components), including the b w* part.
  CVec2 rho_grad(const Vec2& x) const;

  std::string to_json() const;
};

/// Solve p_full(x, phi'_x, eps) = z(xi, eps) with phi = x.xi + eps_tilde rho.
/// p_poly is the x-independent polynomial part p(xi) + i eps q(xi,eps); the
/// remainder r = p_full - p_poly drives the iteration. The smallness ratio
/// sum_keys |c| eps_tilde^{|alpha|} eps^m / (eps min(eps, eps_tilde)) must stay
/// below `smallness_threshold`.
PhaseSolution hj_solve(const ClassicalSymbol& p_full, const ClassicalSymbol& p_poly,
                       const Vec2& xi, double eps, double eps_tilde, double tol = 1e-12,
                       int max_iter = 60, double smallness_threshold = 0.1);

struct ActionMap {
  std::vector<Vec2> xi;
  std::vector<CVec2> eta;  // eta_j = xi_j + eps_tilde b w*'_j
};

/// Actions eta(xi) from solved phases; the x-independence of the increment
/// (psi(x + 2pi e_j) - psi(x))/2pi is verified across grid points to 1e-10.
ActionMap action_map(const std::vector<PhaseSolution>& phases, double x_check_tol = 1e-10);

/// Local inversion xi(eta) by damped Newton, re-solving the phase per iterate.
Vec2 invert_action(const std::function<PhaseSolution(Vec2)>& solve, const CVec2& eta_target,
                   Vec2 xi_guess, double tol = 1e-11, int max_iter = 50);

}  // namespace speclab::hamjac
