#pragma once

// Classical and quantum Birkhoff normal forms near the Diophantine torus xi = 0:
// iterative cohomological solves producing x-independent normal forms plus
// generators and remainders.

#include <string>
#include <vector>

#include "speclab/symbol.hpp"

namespace speclab::birkhoff {

using num::Cplx;
using num::Vec2i;
using symbols::ClassicalSymbol;
using symbols::FrequencyVector;
using symbols::OperatorSymbol;

class small_divisor_error : public std::runtime_error {
 public:
  small_divisor_error(Vec2i mode, double divisor)
      : std::runtime_error("small divisor |a.k| = " + std::to_string(divisor) + " at mode (" +
                           std::to_string(mode[0]) + "," + std::to_string(mode[1]) + ")"),
        mode(mode),
        divisor(divisor) {}
  Vec2i mode;
  double divisor;
};

/// Solves a . d_x G = rhs by Fourier division G^(k,alpha,m) = rhs^(k,alpha,m)/(i a.k).
/// rhs must have no k = 0 modes. Division is refused when the observed divisor
/// falls far below the certified Diophantine floor (mis-certified frequency).
ClassicalSymbol cohomological_solve(const ClassicalSymbol& rhs, const FrequencyVector& a);

struct ClassicalNormalForm {
  std::vector<ClassicalSymbol> generators;  // G_1..G_{N-1}, G_j homogeneous of degree j+1
  // Order-eps reduction generator eps w(x) (xi-independent, degree 1) removing
  // the x-dependence of the i eps q term before the Birkhoff stage proper;
  // zero when the input already has an x-independent degree-1 part.
  ClassicalSymbol averaging_generator;
  ClassicalSymbol p_of_xi_eps;              // x-independent through degree N
  ClassicalSymbol residual;                 // p0 o exp(H_G) - p_of_xi_eps; degrees >= N+1
  int order_N = 0;
};

/// Prop-3.1-style construction: choose G_1..G_{N-1} so that p0 o exp(H_{G^{(N)}})
/// is x-independent through total (xi,eps)-degree N. The degree-1 part of p0
/// must be x-independent. `work_degree` (default N+2) is the truncation degree
/// used when forming the final composition and residual.
ClassicalNormalForm classical_normal_form(const ClassicalSymbol& p0, const FrequencyVector& a,
                                          int N, int work_degree = -1);

struct NormalFormResult {
  OperatorSymbol p_normal;                    // x-independent h-terms (k = 0 modes only)
  std::vector<ClassicalSymbol> generators_G;  // classical stage, G_1..G_{N-1}
  ClassicalSymbol averaging_generator;        // order-eps pre-stage (see ClassicalNormalForm)
  std::vector<ClassicalSymbol> generators_Q;  // quantum stage, q_0..q_{N-1}, <q_n> = 0
  int order_N = 0;
  // Max |coeff| of the x-dependent residual of total (xi,eps,h)-degree <= N+1
  // (the leading remainder block; degrees <= N vanish to rounding by construction).
  double remainder_norm = 0.0;
  // Full conjugated symbol including the x-dependent residual, for auditing.
  OperatorSymbol conjugated;

  std::string to_json() const;
};

/// Quantum stage alone (Prop-3.2-style): the h^0 symbol must already be in
/// classical normal form through degree N. Chooses q_0..q_{N-1} with <q_n> = 0
/// making every h-term x-independent through (xi,eps)-degree N.
NormalFormResult quantum_normal_form(const OperatorSymbol& P, const FrequencyVector& a, int N,
                                     int work_degree = -1);

/// Classical stage followed by the quantum stage on the conjugated operator.
NormalFormResult full_normal_form_pipeline(const OperatorSymbol& P, const FrequencyVector& a,
                                           int N, int work_degree = -1);

/// Conjugated symbol of e^{-iG/h} P e^{iG/h}: sum_k (1/k!) M_G^k(P) with
/// M_G = moyal_bracket(G, .), truncated at joint (xi,eps,h)-degree and h-order.
/// G may combine the degree-1 averaging piece with degree >= 2 generators.
OperatorSymbol conjugate_by_generator(const OperatorSymbol& P, const ClassicalSymbol& G,
                                      int max_joint_degree, int h_order);

/// Conjugated symbol of e^{-Q} P e^{Q} for Q = sum h^n q_n, with the sign
/// convention s_1 = p_1 + i H_{p_0} q_0.
OperatorSymbol conjugate_by_exponential(const OperatorSymbol& P, const OperatorSymbol& Q,
                                        int max_joint_degree, int h_order);

/// Default cap on N; the iterated brackets blow up factorially beyond this.
inline constexpr int kDefaultMaxOrder = 8;

}  // namespace speclab::birkhoff
