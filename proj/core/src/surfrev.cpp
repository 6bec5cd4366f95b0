#include "speclab/surfrev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace speclab::surfrev {

namespace {

constexpr double kPi = 3.14159265358979323846;

double q1_theta_average(const std::function<double(double, double)>& q1, double s) {
  return num::integrate_gl([&](double th) { return q1(s, th); }, 0.0, 2 * kPi, 8, 16) / (2 * kPi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

SurfaceProfile validate_profile(std::function<double(double)> f, std::function<double(double)> df,
                                double L, std::string kind) {
  if (!(L > 0)) throw std::invalid_argument("validate_profile: L must be positive");
  const int n_scan = 4096;
  // Endpoint slopes of the arc-length parametrization.
  if (std::abs(df(0.0) - 1.0) > 1e-6)
    throw std::invalid_argument("validate_profile: f'(0) must equal 1");
  if (std::abs(df(L) + 1.0) > 1e-6)
    throw std::invalid_argument("validate_profile: f'(L) must equal -1");

  // Locate critical points of f by sign scanning f'.
  std::vector<double> crossings;
  int plateau_run = 0;
  double prev_s = 0.0, prev_d = df(0.0);
  for (int i = 1; i <= n_scan; ++i) {
    double s = L * i / n_scan;
    double d = df(s);
    if (std::abs(d) < 1e-10) {
      if (++plateau_run > 3)
        throw std::invalid_argument("validate_profile: plateau detected (degenerate maximum)");
    } else {
      plateau_run = 0;
    }
    if (prev_d > 0 && d < 0) crossings.push_back(num::find_root(df, prev_s, s));
    if (prev_d < 0 && d > 0)
      throw std::invalid_argument("validate_profile: interior minimum detected");
    prev_s = s;
    prev_d = d;
  }
  if (crossings.size() != 1)
    throw std::invalid_argument("validate_profile: profile must have exactly one critical point, found " +
                                std::to_string(crossings.size()));
  double s0 = crossings[0];
  const double ds = L * 1e-5;
  double fpp = (df(s0 + ds) - df(s0 - ds)) / (2 * ds);
  if (!(fpp < -1e-6))
    throw std::invalid_argument("validate_profile: maximum must be nondegenerate (f''(s0) < 0)");

  // Normalize f(s0) = 1 by the slope-preserving rescale f(s) -> f(c s)/c.
  const double c = f(s0);
  if (!(c > 0)) throw std::invalid_argument("validate_profile: profile maximum must be positive");
  SurfaceProfile sp;
  sp.kind = std::move(kind);
  sp.f_max = c;
  sp.L = L / c;
  sp.s0 = s0 / c;
  sp.f_ = [f, c](double s) { return f(c * s) / c; };
  sp.df_ = [df, c](double s) { return df(c * s); };
  sp.fpp_s0_ = c * fpp;
  return sp;
}

SurfaceProfile sphere_profile() {
  return validate_profile([](double s) { return std::sin(s); },
                          [](double s) { return std::cos(s); }, kPi, "sphere");
}

SurfaceProfile ellipsoid_profile(double b) {
  if (b <= -0.3) throw std::invalid_argument("ellipsoid_profile: b too negative");
  auto f = [b](double s) {
    double sn = std::sin(s);
    return sn * (1.0 + b * sn * sn);
  };
  auto df = [b](double s) {
    double sn = std::sin(s), cs = std::cos(s);
    return cs * (1.0 + 3.0 * b * sn * sn);
  };
  return validate_profile(f, df, kPi, "ellipsoid");
}

SurfaceProfile sampled_profile(const std::vector<double>& s, const std::vector<double>& f) {
  num::MonotoneCubic interp(s, f);
  double L = s.back();
  if (std::abs(s.front()) > 1e-12)
    throw std::invalid_argument("sampled_profile: samples must start at s = 0");
  return validate_profile([interp](double x) { return interp(x); },
                          [interp](double x) { return interp.derivative(x); }, L, "samples");
}

SurfaceProfile profile_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sphere") return sphere_profile();
  if (kind == "ellipsoid") return ellipsoid_profile(j.value("b", 0.1));
  if (kind == "samples")
    return sampled_profile(j.at("s").get<std::vector<double>>(),
                           j.at("f").get<std::vector<double>>());
  throw std::invalid_argument("profile_from_json: unknown kind '" + kind + "'");
}

double SurfaceProfile::c_of_x(double x) const {
  if (x > 1.0 || x < -1.0) throw std::invalid_argument("c_of_x: x must lie in [-1,1]");
  const double target = std::sqrt(std::max(0.0, 1.0 - x * x));
  double lo, hi;
  if (x >= 0) {
    lo = 0.0;
    hi = s0;
  } else {
    lo = s0;
    hi = L;
  }
  if (std::abs(x) < 1e-14) return s0;
  auto g = [&](double s) { return f_(s) - target; };
  double s = num::find_root(g, lo, hi, 1e-15 * L);
  // Newton polish.
  for (int it = 0; it < 3; ++it) {
    double d = df_(s);
    if (std::abs(d) < 1e-14) break;
    s -= (f_(s) - target) / d;
    s = std::clamp(s, std::min(lo, hi), std::max(lo, hi));
  }
  return s;
}

double SurfaceProfile::h_of_x(double x) const {
  if (std::abs(x) < 1e-7) return 1.0 / std::sqrt(-fpp_s0_);
  return x / df_(c_of_x(x));
}

// ---------------------------------------------------------------------------
// Actions, rotation number, torus averages
// ---------------------------------------------------------------------------

std::pair<double, double> turning_points(const SurfaceProfile& sp, double a) {
  const double aa = std::abs(a);
  if (!(aa > 0 && aa < 1)) throw std::invalid_argument("turning_points: need 0 < |a| < 1");
  double x0 = std::sqrt(1 - aa * aa);
  return {sp.c_of_x(x0), sp.c_of_x(-x0)};
}

double J_integral(const SurfaceProfile& sp, const std::function<double(double)>& psi, double a) {
  const double aa = std::abs(a);
  if (!(aa < 1)) throw std::invalid_argument("J_integral: need |a| < 1");
  const double x0 = std::sqrt(1 - aa * aa);
  // x = x0 sin t removes the endpoint weight (1 - x^2 - a^2)^{-1/2} exactly.
  auto integrand = [&](double t) {
    double x = x0 * std::sin(t);
    return psi(sp.c_of_x(x)) * sp.h_of_x(x);
  };
  double prev = num::integrate_gl(integrand, -kPi / 2, kPi / 2, 4, 24);
  for (int panels = 8; panels <= 256; panels *= 2) {
    double cur = num::integrate_gl(integrand, -kPi / 2, kPi / 2, panels, 24);
    if (std::abs(cur - prev) <= 1e-11 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

double rotation_number(const SurfaceProfile& sp, double a) {
  const double aa = std::abs(a);
  if (!(aa > 0 && aa < 1)) throw std::invalid_argument("rotation_number: need 0 < |a| < 1");
  const double x0 = std::sqrt(1 - aa * aa);
  auto integrand = [&](double t) {
    double x = x0 * std::sin(t);
    return sp.h_of_x(x) / (1.0 - x * x);
  };
  double prev = num::integrate_gl(integrand, -kPi / 2, kPi / 2, 4, 24);
  double val = prev;
  for (int panels = 8; panels <= 256; panels *= 2) {
    double cur = num::integrate_gl(integrand, -kPi / 2, kPi / 2, panels, 24);
    val = cur;
    if (std::abs(cur - prev) <= 1e-11 * std::max(1.0, std::abs(cur))) break;
    prev = cur;
  }
  return (a / kPi) * val;
}

double torus_average(const SurfaceProfile& sp, const std::function<double(double)>& q0, double a) {
  return J_integral(sp, q0, a) / J_integral(sp, [](double) { return 1.0; }, a);
}

double action_I1(const SurfaceProfile& sp, double E, double F) {
  if (!(E > 0)) throw std::invalid_argument("action_I1: E must be positive");
  const double a = std::abs(F) / std::sqrt(E);
  if (!(a > 0 && a < 1)) throw std::invalid_argument("action_I1: need 0 < |F| < sqrt(E)");
  // I1 = 2 sqrt(E) int (1 - a^2/f^2)^{1/2} ds = 2 sqrt(E) J((f^2-a^2)/f^2 ... ) --
  // directly: integrand (f^2 - a^2)^{1/2}/f, which in the x-variables becomes
  // (1 - x^2 - a^2)/( (1-x^2) sqrt(1-x^2-a^2) ) h(x) dx; after x = x0 sin t the
  // weight is again regular.
  const double x0 = std::sqrt(1 - a * a);
  auto integrand = [&](double t) {
    double x = x0 * std::sin(t);
    double c2 = x0 * std::cos(t);  // sqrt(1 - x^2 - a^2)
    return c2 * c2 / (1.0 - x * x) * sp.h_of_x(x);
  };
  double prev = num::integrate_gl(integrand, -kPi / 2, kPi / 2, 4, 24);
  double val = prev;
  for (int panels = 8; panels <= 256; panels *= 2) {
    double cur = num::integrate_gl(integrand, -kPi / 2, kPi / 2, panels, 24);
    val = cur;
    if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) break;
    prev = cur;
  }
  return 2.0 * std::sqrt(E) * val;
}

// ---------------------------------------------------------------------------
// Resonant intervals on the torus
// ---------------------------------------------------------------------------

namespace {

struct HalfOrbit {
  // Tables over v in [-pi/2, pi/2], uniform grid: s(v), theta offset from the
  // half start, and the time weight h(x(v))/2.
  std::vector<double> s, theta, weight;
  double dtheta_total = 0;  // = pi * omega
  double dt_total = 0;      // = J(1,a)/2
};

HalfOrbit build_half(const SurfaceProfile& sp, double a, bool ascending, int n_v) {
  const double x0 = std::sqrt(1 - a * a);
  HalfOrbit ho;
  ho.s.resize(n_v + 1);
  ho.theta.resize(n_v + 1);
  ho.weight.resize(n_v + 1);
  std::vector<double> dth(n_v + 1);
  for (int i = 0; i <= n_v; ++i) {
    double v = -kPi / 2 + kPi * i / n_v;
    double x = (ascending ? -1.0 : 1.0) * x0 * std::sin(v);
    ho.s[i] = sp.c_of_x(x);
    ho.weight[i] = sp.h_of_x(x) / 2.0;
    dth[i] = a * sp.h_of_x(x) / (1.0 - x * x);
  }
  // Cumulative theta by the trapezoid rule on the uniform grid.
  const double dv = kPi / n_v;
  ho.theta[0] = 0;
  for (int i = 1; i <= n_v; ++i)
    ho.theta[i] = ho.theta[i - 1] + 0.5 * (dth[i - 1] + dth[i]) * dv;
  ho.dtheta_total = ho.theta[n_v];
  double t = 0;
  for (int i = 1; i <= n_v; ++i) t += 0.5 * (ho.weight[i - 1] + ho.weight[i]) * dv;
  ho.dt_total = t;
  return ho;
}

}  // namespace

std::pair<double, double> q_infinity_interval(const SurfaceProfile& sp,
                                              const std::function<double(double, double)>& q,
                                              double a, int grid,
                                              std::optional<std::pair<int, int>> omega_rational) {
  if (!(std::abs(a) > 0 && std::abs(a) < 1))
    throw std::invalid_argument("q_infinity_interval: need 0 < |a| < 1");
  if (!omega_rational) {
    // Irrational treatment: the degenerate interval at the torus average.
    auto qbar = [&](double s) { return q1_theta_average(q, s); };
    double v = torus_average(sp, qbar, a);
    return {v, v};
  }
  int m = omega_rational->first, n = omega_rational->second;
  if (n <= 0) throw std::invalid_argument("q_infinity_interval: denominator must be positive");
  const int n_v = 2048;
  HalfOrbit asc = build_half(sp, a, true, n_v);
  HalfOrbit desc = build_half(sp, a, false, n_v);
  const double period_time = 2 * n * asc.dt_total;  // n full s-oscillations close the orbit

  const double dv = kPi / n_v;
  auto orbit_average = [&](double theta0) {
    double acc = 0;
    double theta_base = theta0;
    for (int half = 0; half < 2 * n; ++half) {
      const HalfOrbit& ho = (half % 2 == 0) ? asc : desc;
      // Trapezoid over the half orbit.
      double sum = 0.5 * (q(ho.s[0], theta_base + ho.theta[0]) * ho.weight[0] +
                          q(ho.s[n_v], theta_base + ho.theta[n_v]) * ho.weight[n_v]);
      for (int i = 1; i < n_v; ++i) sum += q(ho.s[i], theta_base + ho.theta[i]) * ho.weight[i];
      acc += sum * dv;
      theta_base += ho.dtheta_total;
    }
    return acc / period_time;
  };

  int n_theta = std::max(grid, 16);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int refine = 0; refine < 8; ++refine) {
    double nlo = std::numeric_limits<double>::infinity(), nhi = -nlo;
    for (int i = 0; i < n_theta; ++i) {
      double v = orbit_average(2 * kPi * i / n_theta);
      nlo = std::min(nlo, v);
      nhi = std::max(nhi, v);
    }
    bool stable = refine > 0 && std::abs(nlo - lo) < 1e-8 && std::abs(nhi - hi) < 1e-8;
    lo = nlo;
    hi = nhi;
    if (stable) break;
    n_theta *= 2;
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Good-value sets
// ---------------------------------------------------------------------------

namespace {

// Smallest |p|+q over rationals violating the (alpha,d) Diophantine condition;
// INT_MAX when omega passes the test up to q_cap. Convergents suffice for
// alpha < 1/2 since any violator is a convergent.
long nearest_resonance_order(double omega, double alpha, double d, std::int64_t q_cap) {
  long best = std::numeric_limits<long>::max();
  for (const auto& [p, q] : num::convergents(omega, q_cap)) {
    if (q < 1) continue;
    double gap = std::abs(omega - double(p) / double(q));
    if (gap < alpha / std::pow(double(q), 2.0 + d)) best = std::min<long>(best, std::labs(p) + q);
  }
  return best;
}

}  // namespace

GoodSetReport good_set(const SurfaceProfile& sp, const std::function<double(double)>& q0,
                       const std::function<double(double, double)>& q1, double eta, double alpha,
                       double d, int a_grid, const std::vector<double>& probe_values,
                       double probe_neighborhood, std::int64_t q_cap) {
  if (!(alpha > 0 && d > 0)) throw std::invalid_argument("good_set: alpha, d must be positive");
  GoodSetReport rep;
  rep.alpha = alpha;
  rep.d = d;
  rep.eta = eta;

  // The theta-average of q1 often vanishes identically (e.g. cos theta);
  // detect that once and skip the inner theta quadratures on the sweep.
  bool q1_flat = true;
  for (double s_probe : {0.1 * sp.L, 0.37 * sp.L, 0.62 * sp.L, 0.9 * sp.L})
    if (std::abs(q1_theta_average(q1, s_probe)) > 1e-14) q1_flat = false;
  auto qeta_avg = [&](double a) {
    if (q1_flat || eta == 0.0) return torus_average(sp, q0, a);
    auto combined = [&](double s) { return q0(s) + eta * q1_theta_average(q1, s); };
    return torus_average(sp, combined, a);
  };
  auto q0_avg = [&](double a) { return torus_average(sp, q0, a); };

  const int n = std::max(a_grid, 16);
  rep.grid_a.resize(n);
  rep.grid_omega.resize(n);
  rep.grid_avg.resize(n);
  std::vector<double> avg0(n);
  num::parallel_for(n, [&](std::size_t i) {
    double a = -1.0 + 2.0 * (i + 0.5) / n;
    rep.grid_a[i] = a;
    rep.grid_omega[i] = (std::abs(a) < 1e-9) ? 0.0 : rotation_number(sp, a);
    rep.grid_avg[i] = qeta_avg(a);
    avg0[i] = q0_avg(a);
  });
  rep.grid_domega.resize(n);
  std::vector<double> davg(n);
  const double da = 2.0 / n;
  for (int i = 0; i < n; ++i) {
    int im = std::max(0, i - 1), ip = std::min(n - 1, i + 1);
    rep.grid_domega[i] = (rep.grid_omega[ip] - rep.grid_omega[im]) / ((ip - im) * da);
    davg[i] = (avg0[ip] - avg0[im]) / ((ip - im) * da);
  }

  rep.grid_good.assign(n, 1);
  std::vector<long> res_order(n, std::numeric_limits<long>::max());
  num::parallel_for(n, [&](std::size_t i) {
    double a = rep.grid_a[i];
    bool bad = false;
    if (1.0 - std::abs(a) < alpha) bad = true;                       // dist(a, S) < alpha
    else if (std::abs(rep.grid_domega[i]) < alpha) bad = true;       // isoenergetic failure
    else if (std::abs(davg[i]) < alpha) bad = true;                  // |d_a <q0>| < alpha
    else {
      res_order[i] = nearest_resonance_order(rep.grid_omega[i], alpha, d, q_cap);
      if (res_order[i] != std::numeric_limits<long>::max()) bad = true;  // Diophantine failure
    }
    rep.grid_good[i] = bad ? 0 : 1;
  });

  // Range of the average map and the image of the bad set (per maximal bad run,
  // using continuity of a -> <q_eta>).
  double range_lo = std::numeric_limits<double>::infinity(), range_hi = -range_lo;
  for (double v : rep.grid_avg) {
    range_lo = std::min(range_lo, v);
    range_hi = std::max(range_hi, v);
  }
  IntervalSet bad_image;
  int i = 0;
  while (i < n) {
    if (rep.grid_good[i]) {
      ++i;
      continue;
    }
    int j = i;
    double lo = rep.grid_avg[i], hi = rep.grid_avg[i];
    while (j + 1 < n && !rep.grid_good[j + 1]) {
      ++j;
      lo = std::min(lo, rep.grid_avg[j]);
      hi = std::max(hi, rep.grid_avg[j]);
    }
    // Pad by one grid cell's worth of image on each side (continuity slack).
    int il = std::max(0, i - 1), jr = std::min(n - 1, j + 1);
    lo = std::min({lo, rep.grid_avg[il]});
    hi = std::max({hi, rep.grid_avg[jr]});
    bad_image.add(lo, hi);
    i = j + 1;
  }
  rep.excluded_measure = 0;
  for (const auto& iv : bad_image.intervals)
    rep.excluded_measure += std::max(0.0, std::min(iv.second, range_hi) - std::max(iv.first, range_lo));

  rep.good_intervals = IntervalSet{};
  // Complement of the bad image within [range_lo, range_hi].
  double cursor = range_lo;
  for (const auto& iv : bad_image.intervals) {
    double lo = std::max(range_lo, iv.first), hi = std::min(range_hi, iv.second);
    if (lo > cursor) rep.good_intervals.add(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  if (cursor < range_hi) rep.good_intervals.add(cursor, range_hi);

  // Probe values: preimages and separation margins.
  for (double F0 : probe_values) {
    ProbeReport pr;
    pr.F0 = F0;
    for (int k = 0; k + 1 < n; ++k) {
      double va = rep.grid_avg[k] - F0, vb = rep.grid_avg[k + 1] - F0;
      if (va == 0.0) pr.preimages.push_back(rep.grid_a[k]);
      if (va * vb < 0) {
        double root = num::find_root([&](double a) { return qeta_avg(a) - F0; }, rep.grid_a[k],
                                     rep.grid_a[k + 1], 1e-12);
        pr.preimages.push_back(root);
      }
    }
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      double a = rep.grid_a[k];
      bool near_preimage = false;
      for (double root : pr.preimages)
        if (std::abs(a - root) < probe_neighborhood) near_preimage = true;
      if (near_preimage) continue;
      // Q_inf(a) = {<q_eta>(a)} fattened by the resonant width surrogate
      // 2 eta / k^4 at the nearest failing resonance (none -> no fattening).
      double width = 0;
      long k_star = res_order[k];
      if (k_star != std::numeric_limits<long>::max())
        width = 2.0 * std::abs(eta) / std::pow(double(k_star), 4.0);
      margin = std::min(margin, std::abs(rep.grid_avg[k] - F0) - width);
    }
    pr.separation_margin = margin;
    rep.probes.push_back(pr);
  }
  return rep;
}

double solve_rotation_number(const SurfaceProfile& sp, double target, double lo, double hi) {
  return num::find_root([&](double a) { return rotation_number(sp, a) - target; }, lo, hi, 1e-13);
}

std::string GoodSetReport::to_csv() const {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(15);
  os << "a,omega,domega,avg_q0,is_good\n";
  for (std::size_t i = 0; i < grid_a.size(); ++i)
    os << grid_a[i] << "," << grid_omega[i] << "," << grid_domega[i] << "," << grid_avg[i] << ","
       << int(grid_good[i]) << "\n";
  return os.str();
}

std::string GoodSetReport::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["d"] = d;
  j["eta"] = eta;
  j["excluded_measure"] = excluded_measure;
  auto ivals = nlohmann::json::array();
  for (const auto& iv : good_intervals.intervals) ivals.push_back({iv.first, iv.second});
  j["good_intervals"] = std::move(ivals);
  auto probes_json = nlohmann::json::array();
  for (const auto& p : probes) {
    probes_json.push_back(
        {{"F0", p.F0}, {"preimages", p.preimages}, {"separation_margin", p.separation_margin}});
  }
  j["probes"] = std::move(probes_json);
  return j.dump(2);
}

}  // namespace speclab::surfrev
