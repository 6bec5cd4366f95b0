#pragma once

// Flow averages along quasi-periodic flows, Diophantine certification,
// resonant-torus range sets, and harmonic-oscillator quartic averages.

#include <functional>
#include <optional>
#include <vector>

#include "speclab/symbol.hpp"

namespace speclab::averaging {

using num::Cplx;
using num::Vec2;
using num::Vec2i;
using symbols::ClassicalSymbol;
using symbols::FrequencyVector;

/// Compactly supported smoothing density K >= 0 with int K = 1, together with
/// its Fourier transform Khat(s) = int e^{-i t s} K(t) dt (so Khat(0) = 1).
class SmoothingKernel {
 public:
  /// Normalized bump c * exp(-1/(1-(t/w)^2)^p) on (-w, w). Defaults to the
  /// standard w = 1, p = 1 bump. Khat values are cached on a grid and
  /// interpolated cubically; the tails are computed directly.
  static SmoothingKernel bump(double halfwidth = 1.0, double sharpness = 1.0);
  /// Indicator kernel 1_{[-1,0]} (the plain flow average); Khat analytic.
  static SmoothingKernel box();
  /// Custom density on [t0,t1]; normalized internally, Khat by quadrature.
  static SmoothingKernel custom(double t0, double t1, std::function<double(double)> density);

  double support_lo() const { return t0_; }
  double support_hi() const { return t1_; }
  double density(double t) const { return density_(t); }
  /// Khat(s); real for even kernels, complex in general (real part returned
  /// by hat(), full value by hat_complex()).
  double hat(double s) const;
  Cplx hat_complex(double s) const;

 private:
  SmoothingKernel() = default;
  double t0_ = -1.0, t1_ = 1.0;
  std::function<double(double)> density_;
  bool even_ = true;
  bool analytic_box_ = false;
  // Catmull-Rom cache of the real transform on [0, cache_max_], step cache_step_.
  std::vector<double> cache_;
  double cache_step_ = 0.0, cache_max_ = 0.0;
  Cplx hat_direct(double s) const;
  void fill_cache();
};

/// Finite union of closed intervals, kept sorted and disjoint.
struct IntervalSet {
  std::vector<std::pair<double, double>> intervals;

  void add(double lo, double hi);
  void normalize();
  double measure() const;
  bool contains(double x) const;
  double lo() const;
  double hi() const;
  /// Distance from x to the set (0 when inside).
  double distance(double x) const;
};

struct DiophantineReport {
  bool ok = false;
  Vec2i worst_mode{0, 0};
  double worst_ratio = 0.0;  // min over k of C0 |a.k| |k|^{N0}; ok iff >= 1
};

/// Checks |a.k| C0 |k|^{N0} >= 1 for all 0 != k with ||k||_inf <= k_cap.
DiophantineReport check_diophantine(const Vec2& a, double C0, double N0, int k_cap);

/// Certify a FrequencyVector up to k_cap; throws on failure.
FrequencyVector certify(const Vec2& a, double C0, double N0, int k_cap);

/// Smoothed flow average <q>_{T,K,p_N} per mode: the (k,.) coefficients are
/// multiplied by Khat(T a_N . k) with a_N = Re d_xi p_N(0,0); k = 0 modes pass
/// through unchanged. p_N must be x-independent.
ClassicalSymbol flow_average(const ClassicalSymbol& q, const ClassicalSymbol& p_N, double T,
                             const SmoothingKernel& K);

/// Limit of the flow average on a rational torus with direction b (integer,
/// scaled to coprime): retains exactly the modes with b.k = 0.
ClassicalSymbol resonant_average(const ClassicalSymbol& q, Vec2i b);

/// Q_infinity for a rational direction b: [min, max] over the angle variable of
/// Re(resonant average), with grid refinement until endpoints move < 1e-8.
IntervalSet q_infinity_range(const ClassicalSymbol& q_on_torus, Vec2i b, int grid = 256);

/// Q_infinity for a certified Diophantine frequency: the single point Re qhat(0).
IntervalSet q_infinity_range(const ClassicalSymbol& q_on_torus, const FrequencyVector& b);

/// Coefficients of sum_{|alpha|=4} v_alpha x^alpha.
struct QuarticForm {
  double v40 = 0, v31 = 0, v22 = 0, v13 = 0, v04 = 0;
};

/// Quadratic form c20 I1^2 + c11 I1 I2 + c02 I2^2 in the actions.
struct ActionQuadratic {
  double c20 = 0, c11 = 0, c02 = 0;
  double eval(double I1, double I2) const { return c20 * I1 * I1 + c11 * I1 * I2 + c02 * I2 * I2; }
};

/// Torus average of the quartic along the non-resonant harmonic flow:
/// <p4> = (1/4)(6 v40 I1^2 + 4 v22 I1 I2 + 6 v04 I2^2).
ActionQuadratic harmonic_quartic_average(const QuarticForm& v);

/// Critical values of <p4> restricted to p2 = lambda.I = 1: always
/// A1 = (3/2) v04 / lambda2^2 and A2 = (3/2) v40 / lambda1^2, plus A3 when the
/// critical line (lambda1 v22 - 3 lambda2 v40) I1 = (lambda2 v22 - 3 lambda1 v04) I2
/// meets the open positive quadrant.
std::vector<double> critical_values(const Vec2& lambda, const QuarticForm& v);

/// Rotation data for one mu-slice of a torus family: either an (irrational)
/// certified direction, treated as a point average, or an exact integer
/// direction b with b.k = 0 resonances.
using TorusFrequency = std::optional<Vec2i>;  // nullopt = irrational treatment

struct IntegrableConditionReport {
  bool ok = false;
  double margin = 0.0;  // min separation across both mu-ranges; <= 0 when !ok
};

/// Checks inf_{mu in [b_tilde,b]} Q_inf(mu) > F0 and
/// sup_{mu in [-b,-b_tilde]} Q_inf(mu) < F0 on sampled mu-grids.
IntegrableConditionReport verify_integrable_condition(
    const std::function<ClassicalSymbol(double)>& q_family,
    const std::function<TorusFrequency(double)>& omega, double F0, double b_tilde, double b,
    int grid);

}  // namespace speclab::averaging
