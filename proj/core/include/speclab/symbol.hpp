#pragma once

// Truncated Fourier-Taylor symbol arithmetic on T*T^2.
//
// A ClassicalSymbol is a finite sum
//     s(x, xi, eps) = sum c(k, alpha, m) e^{i k.x} xi^alpha eps^m
// over keys within fixed caps (max Fourier mode, max xi-degree, max eps-power).
// An OperatorSymbol is an h-expansion p_0 + h p_1 + h^2 p_2 + ... of such symbols.
//
// Convention used throughout: H_G f := {G, f} = G'_xi . d_x f - G'_x . d_xi f,
// so that for p = a.xi one has H_p = a . d_x.

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/numerics.hpp"

namespace speclab::symbols {

using num::Cplx;
using num::CVec2;
using num::Vec2;
using num::Vec2i;

struct SymbolCaps {
  int k_max = 8;   // max ||k||_inf of retained Fourier modes
  int n_xi = 6;    // max |alpha|
  int m_eps = 6;   // max eps power
  bool operator==(const SymbolCaps&) const = default;
};

struct SymbolKey {
  Vec2i k{0, 0};
  Vec2i alpha{0, 0};
  int m = 0;
  auto operator<=>(const SymbolKey&) const = default;
  int xi_degree() const { return alpha[0] + alpha[1]; }
  int degree() const { return alpha[0] + alpha[1] + m; }  // joint (xi,eps)-degree
};

class cap_mismatch : public std::invalid_argument {
 public:
  cap_mismatch() : std::invalid_argument("symbol caps differ between operands") {}
};

class ClassicalSymbol {
 public:
  ClassicalSymbol() = default;
  explicit ClassicalSymbol(SymbolCaps caps) : caps_(caps) {}

  static ClassicalSymbol zero(SymbolCaps caps) { return ClassicalSymbol(caps); }
  static ClassicalSymbol constant(SymbolCaps caps, Cplx c);
  /// xi_j as a symbol.
  static ClassicalSymbol xi(SymbolCaps caps, int j);
  /// c * e^{i k.x} xi^alpha eps^m.
  static ClassicalSymbol monomial(SymbolCaps caps, Vec2i k, Vec2i alpha, int m, Cplx c);
  /// cos(k.x), sin(k.x) as real-on-real symbols.
  static ClassicalSymbol cosine(SymbolCaps caps, Vec2i k);
  static ClassicalSymbol sine(SymbolCaps caps, Vec2i k);

  const SymbolCaps& caps() const { return caps_; }
  const std::map<SymbolKey, Cplx>& terms() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }

  Cplx coeff(const SymbolKey& key) const;
  /// Insert/overwrite one coefficient; throws std::out_of_range if the key exceeds caps.
  void set(const SymbolKey& key, Cplx c);
  /// Add into one coefficient, truncating (and recording) keys outside the caps.
  void accumulate(const SymbolKey& key, Cplx c);

  bool truncated() const { return truncated_; }
  void mark_truncated() { truncated_ = true; }

  bool real_on_real() const { return real_on_real_; }
  /// Flag the symbol real-on-real; verifies c(-k,alpha,m) == conj(c(k,alpha,m)).
  void set_real_on_real(bool flag, double tol = 1e-12);
  /// True when the coefficient symmetry for real values on real (x,xi,eps) holds.
  bool check_real_on_real(double tol = 1e-12) const;

  ClassicalSymbol& operator+=(const ClassicalSymbol& o);
  ClassicalSymbol& operator-=(const ClassicalSymbol& o);
  ClassicalSymbol& operator*=(Cplx c);
  friend ClassicalSymbol operator+(ClassicalSymbol a, const ClassicalSymbol& b) { return a += b; }
  friend ClassicalSymbol operator-(ClassicalSymbol a, const ClassicalSymbol& b) { return a -= b; }
  friend ClassicalSymbol operator*(ClassicalSymbol a, Cplx c) { return a *= c; }
  friend ClassicalSymbol operator*(Cplx c, ClassicalSymbol a) { return a *= c; }
  friend ClassicalSymbol operator*(const ClassicalSymbol& a, const ClassicalSymbol& b);

  ClassicalSymbol derivative_x(int j) const;    // d/dx_j  (multiplies by i k_j)
  ClassicalSymbol derivative_xi(int j) const;   // d/dxi_j

  Cplx evaluate(const Vec2& x, const CVec2& xi, double eps) const;
  Cplx evaluate(const Vec2& x, const Vec2& xi, double eps) const;

  double max_abs_coeff() const;
  /// Drop coefficients below 1e-14 relative to the symbol max-norm.
  void prune(double rel_tol = 1e-14);

  int min_degree() const;  // min joint (xi,eps)-degree over stored keys (INT_MAX when empty)
  int max_degree() const;
  /// Part of exact joint degree d / of joint degree <= d.
  ClassicalSymbol degree_part(int d) const;
  ClassicalSymbol truncate_degree(int max_deg) const;
  /// Keys with k != 0.
  ClassicalSymbol x_dependent_part() const;
  /// Retains only k == 0 keys (torus average, Eq-style (2pi)^-2 integral over x).
  ClassicalSymbol torus_average() const;

  std::string to_json() const;
  static ClassicalSymbol from_json(const std::string& text);

 private:
  SymbolCaps caps_{};
  std::map<SymbolKey, Cplx> coeffs_;
  bool real_on_real_ = false;
  bool truncated_ = false;
};

/// {f,g} = f'_xi . d_x g - f'_x . d_xi g, re-truncated to the shared caps.
ClassicalSymbol poisson_bracket(const ClassicalSymbol& f, const ClassicalSymbol& g);

inline ClassicalSymbol torus_average(const ClassicalSymbol& s) { return s.torus_average(); }

/// p o exp(H_G) = sum_k (1/k!) H_G^k p, truncated at the given total (xi,eps)-degree.
/// Requires G = O((xi,eps)^2) so the series is degree-filtered and finite per degree.
ClassicalSymbol exp_hamiltonian_compose(const ClassicalSymbol& p, const ClassicalSymbol& G,
                                        int total_degree);

struct OperatorSymbol {
  std::vector<ClassicalSymbol> h_terms;

  OperatorSymbol() = default;
  explicit OperatorSymbol(ClassicalSymbol p0) { h_terms.push_back(std::move(p0)); }
  explicit OperatorSymbol(std::vector<ClassicalSymbol> terms);

  const SymbolCaps& caps() const;
  /// All h-terms must share caps and the list must be nonempty.
  void validate() const;

  ClassicalSymbol& term(std::size_t n);
  const ClassicalSymbol& term(std::size_t n) const;
  /// Grows with zero symbols up to index n.
  void ensure_term(std::size_t n);

  OperatorSymbol& operator+=(const OperatorSymbol& o);
  OperatorSymbol& operator-=(const OperatorSymbol& o);
  OperatorSymbol& operator*=(Cplx c);
  friend OperatorSymbol operator+(OperatorSymbol a, const OperatorSymbol& b) { return a += b; }
  friend OperatorSymbol operator-(OperatorSymbol a, const OperatorSymbol& b) { return a -= b; }
  friend OperatorSymbol operator*(OperatorSymbol a, Cplx c) { return a *= c; }

  /// Multiply by h^n (shift the expansion index).
  OperatorSymbol h_shift(std::size_t n) const;

  Cplx evaluate(const Vec2& x, const CVec2& xi, double eps, double h) const;
  bool x_independent(double tol = 0.0) const;
  double max_abs_coeff() const;
  void prune(double rel_tol = 1e-14);

  std::string to_json() const;
  static OperatorSymbol from_json(const std::string& text);
};

/// Symbol of (1/ih)[F,G] as the Weyl-Moyal series truncated at h^{h_order}
/// (default order cap 2). The h^0 part equals the Poisson bracket of the
/// leading symbols.
OperatorSymbol moyal_bracket(const OperatorSymbol& f, const OperatorSymbol& g, int h_order = 2);

struct FrequencyVector {
  Vec2 a{0.0, 0.0};
  double C0 = 1.0;
  double N0 = 2.0;
  int certified_cap = 0;  // modes ||k||_inf <= certified_cap verified Diophantine

  FrequencyVector() = default;
  FrequencyVector(Vec2 a_, double C0_, double N0_) : a(a_), C0(C0_), N0(N0_) {
    if (a[0] == 0.0 && a[1] == 0.0) throw std::invalid_argument("FrequencyVector: a must be nonzero");
    if (C0 <= 0.0 || N0 <= 0.0) throw std::invalid_argument("FrequencyVector: C0, N0 must be positive");
  }
};

}  // namespace speclab::symbols
