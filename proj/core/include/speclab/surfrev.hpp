#pragma once

// Simple analytic surfaces of revolution: turning points, actions, rotation
// numbers, torus averages, Diophantine/isoenergetic filtering, and good-value
// sets for the metric ds^2 + f^2(s) dtheta^2.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "speclab/averaging.hpp"
#include "speclab/numerics.hpp"

namespace speclab::surfrev {

using averaging::IntervalSet;
using num::Vec2;

/// Arc-length profile of a simple surface of revolution: f has exactly one
/// critical point s0 (a nondegenerate maximum), f(s0) = 1 after normalization,
/// and f'(0) = 1, f'(L) = -1.
class SurfaceProfile {
 public:
  double L = 0;
  double s0 = 0;
  double f_max = 1.0;       // original maximum before normalization
  std::string kind;

  double f(double s) const { return f_(s); }
  double df(double s) const { return df_(s); }
  /// Inverse branch map of Eq.-(7.14) type: c(x) with f(c(x)) = sqrt(1-x^2),
  /// upper branch [0,s0] for x >= 0, lower branch [s0,L] for x < 0.
  double c_of_x(double x) const;
  /// h(x) = x / f'(c(x)), h(0) = 1/sqrt(|f''(s0)|).
  double h_of_x(double x) const;
  double fpp_at_max() const { return fpp_s0_; }

  SurfaceProfile() = default;
  friend SurfaceProfile validate_profile(std::function<double(double)> f,
                                         std::function<double(double)> df, double L,
                                         std::string kind);

 private:
  std::function<double(double)> f_, df_;
  double fpp_s0_ = -1.0;
};

/// Validates endpoint slopes, uniqueness and nondegeneracy of the maximum, and
/// normalizes f(s0) to 1 by the slope-preserving rescale f(s) -> f(c s)/c.
SurfaceProfile validate_profile(std::function<double(double)> f,
                                std::function<double(double)> df, double L,
                                std::string kind = "custom");

/// The round sphere f = sin s on [0, pi].
SurfaceProfile sphere_profile();
/// Ellipsoid-style family f(s) = sin(s)(1 + b sin^2 s) on [0, pi], normalized.
SurfaceProfile ellipsoid_profile(double b);
/// Sampled profile, monotone-cubic interpolated then validated.
SurfaceProfile sampled_profile(const std::vector<double>& s, const std::vector<double>& f);
/// Parse {"kind":"sphere"} | {"kind":"ellipsoid","b":..} | {"kind":"samples","s":[..],"f":[..]}.
SurfaceProfile profile_from_json(const std::string& text);

/// Turning points f(s_-) = f(s_+) = |a| with s_- < s0 < s_+, for 0 < |a| < 1.
std::pair<double, double> turning_points(const SurfaceProfile& sp, double a);

/// Principal action I1(E,F) = 2 int (E - F^2/f^2)^{1/2} ds (I2 = 2 pi F).
double action_I1(const SurfaceProfile& sp, double E, double F);

/// Rotation number omega(a) = (a/pi) int f^{-2} (1 - a^2/f^2)^{-1/2} ds, odd in a.
double rotation_number(const SurfaceProfile& sp, double a);

/// J(psi, a) = int psi f (f^2-a^2)^{-1/2} ds via the singularity-removing substitutions.
double J_integral(const SurfaceProfile& sp, const std::function<double(double)>& psi, double a);

/// Torus average <q0>_{Lambda_a} = J(q0,a)/J(1,a) for q0 = q0(s).
double torus_average(const SurfaceProfile& sp, const std::function<double(double)>& q0, double a);

/// Range of the limiting flow average of q(s,theta) on Lambda_a. Irrational
/// treatment gives the degenerate interval at the torus average; when the
/// rotation number is supplied as an exact fraction m/n the range of the
/// resonant average over the transverse angle is computed by closed-orbit
/// quadrature with grid refinement.
std::pair<double, double> q_infinity_interval(const SurfaceProfile& sp,
                                              const std::function<double(double, double)>& q,
                                              double a, int grid = 64,
                                              std::optional<std::pair<int, int>> omega_rational = {});

struct ProbeReport {
  double F0 = 0;
  std::vector<double> preimages;      // roots of <q_eta>(a) = F0 inside the good set
  double separation_margin = 0;       // min dist(Q_inf(a), F0) off the preimage neighborhoods
};

struct GoodSetReport {
  double alpha = 0, d = 0, eta = 0;
  IntervalSet good_intervals;         // subset of the range of <q_eta>
  double excluded_measure = 0;
  std::vector<double> grid_a;         // diagnostic grid
  std::vector<double> grid_omega;
  std::vector<double> grid_domega;
  std::vector<double> grid_avg;       // <q_eta>(a)
  std::vector<char> grid_good;
  std::vector<ProbeReport> probes;

  std::string to_csv() const;         // columns: a, omega, domega, avg_q0, is_good
  std::string to_json() const;
};

/// Good-value machinery: marks a bad when dist(a,{±1}) < alpha, |omega'(a)| < alpha,
/// |d_a<q0>| < alpha, or omega(a) fails the (alpha,d)-Diophantine test against
/// denominators q <= q_cap; good values = complement of the image of bad points.
GoodSetReport good_set(const SurfaceProfile& sp, const std::function<double(double)>& q0,
                       const std::function<double(double, double)>& q1, double eta, double alpha,
                       double d, int a_grid = 2000,
                       const std::vector<double>& probe_values = {},
                       double probe_neighborhood = 0.05, std::int64_t q_cap = 10000);

/// Solve omega(a) = target on (lo, hi) by bisection (omega must be monotone there).
double solve_rotation_number(const SurfaceProfile& sp, double target, double lo, double hi);

}  // namespace speclab::surfrev
