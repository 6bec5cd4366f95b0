#include "speclab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace speclab::averaging {

namespace {

int gcd_i(int a, int b) {
  a = std::abs(a);
  b = std::abs(b);
  while (b) {
    int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// SmoothingKernel
// ---------------------------------------------------------------------------

SmoothingKernel SmoothingKernel::bump(double halfwidth, double sharpness) {
  if (halfwidth <= 0 || sharpness <= 0)
    throw std::invalid_argument("SmoothingKernel::bump: halfwidth and sharpness must be positive");
  SmoothingKernel k;
  k.t0_ = -halfwidth;
  k.t1_ = halfwidth;
  const double w = halfwidth, p = sharpness;
  auto raw = [w, p](double t) {
    double u = t / w;
    double r = 1.0 - u * u;
    if (r <= 0.0) return 0.0;
    return std::exp(-1.0 / std::pow(r, p));
  };
  const double mass = num::integrate_gl([&](double t) { return raw(t); }, -w, w, 64, 16);
  k.density_ = [raw, mass](double t) { return raw(t) / mass; };
  k.even_ = true;
  k.fill_cache();
  return k;
}

SmoothingKernel SmoothingKernel::box() {
  SmoothingKernel k;
  k.t0_ = -1.0;
  k.t1_ = 0.0;
  k.density_ = [](double t) { return (t >= -1.0 && t <= 0.0) ? 1.0 : 0.0; };
  k.even_ = false;
  k.analytic_box_ = true;
  return k;
}

SmoothingKernel SmoothingKernel::custom(double t0, double t1, std::function<double(double)> density) {
  if (!(t1 > t0)) throw std::invalid_argument("SmoothingKernel::custom: empty support");
  SmoothingKernel k;
  k.t0_ = t0;
  k.t1_ = t1;
  const double mass = num::integrate_gl([&](double t) { return density(t); }, t0, t1, 128, 16);
  if (!(mass > 0)) throw std::invalid_argument("SmoothingKernel::custom: density must have positive mass");
  k.density_ = [density, mass](double t) { return density(t) / mass; };
  k.even_ = false;
  return k;
}

Cplx SmoothingKernel::hat_direct(double s) const {
  if (analytic_box_) {
    // int_{-1}^0 e^{-its} dt = (e^{is} - 1)/(is)
    if (std::abs(s) < 1e-8) return Cplx(1.0, s * 0.5);
    Cplx is(0.0, s);
    return (std::exp(is) - 1.0) / is;
  }
  // Panel count follows the oscillation count of e^{-its} over the support.
  const double span = t1_ - t0_;
  int panels = std::max(16, (int)std::ceil(std::abs(s) * span / 3.0));
  panels = std::min(panels, 20000);
  return num::integrate_gl_complex(
      [&](double t) { return density_(t) * std::exp(Cplx(0.0, -t * s)); }, t0_, t1_, panels, 16);
}

void SmoothingKernel::fill_cache() {
  cache_step_ = 1.0 / 256.0;
  cache_max_ = 64.0;
  const std::size_t n = (std::size_t)std::llround(cache_max_ / cache_step_) + 1;
  cache_.resize(n);
  num::parallel_for(n, [&](std::size_t i) { cache_[i] = hat_direct(i * cache_step_).real(); });
}

double SmoothingKernel::hat(double s) const { return hat_complex(s).real(); }

Cplx SmoothingKernel::hat_complex(double s) const {
  if (cache_.empty()) return hat_direct(s);
  double as = std::abs(s);
  if (as >= cache_max_ - 2 * cache_step_) return hat_direct(s);
  if (as < 2 * cache_step_) return hat_direct(s);  // exact near 0 (normalization checks)
  // Catmull-Rom on the cached even transform.
  double u = as / cache_step_;
  std::size_t i = (std::size_t)u;
  double t = u - i;
  double pm1 = cache_[i - 1], p0 = cache_[i], p1 = cache_[i + 1], p2 = cache_[i + 2];
  double val = p0 + 0.5 * t * (p1 - pm1 + t * (2 * pm1 - 5 * p0 + 4 * p1 - p2 + t * (3 * (p0 - p1) + p2 - pm1)));
  return Cplx(val, 0.0);
}

// ---------------------------------------------------------------------------
// IntervalSet
// ---------------------------------------------------------------------------

void IntervalSet::add(double lo_, double hi_) {
  if (hi_ < lo_) std::swap(lo_, hi_);
  intervals.emplace_back(lo_, hi_);
  normalize();
}

void IntervalSet::normalize() {
  if (intervals.empty()) return;
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }
  intervals = std::move(merged);
}

double IntervalSet::measure() const {
  double m = 0;
  for (const auto& iv : intervals) m += iv.second - iv.first;
  return m;
}

bool IntervalSet::contains(double x) const {
  for (const auto& iv : intervals)
    if (x >= iv.first && x <= iv.second) return true;
  return false;
}

double IntervalSet::lo() const {
  if (intervals.empty()) throw std::logic_error("IntervalSet::lo on empty set");
  return intervals.front().first;
}

double IntervalSet::hi() const {
  if (intervals.empty()) throw std::logic_error("IntervalSet::hi on empty set");
  return intervals.back().second;
}

double IntervalSet::distance(double x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& iv : intervals) {
    if (x >= iv.first && x <= iv.second) return 0.0;
    d = std::min(d, std::min(std::abs(x - iv.first), std::abs(x - iv.second)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Diophantine certification
// ---------------------------------------------------------------------------

DiophantineReport check_diophantine(const Vec2& a, double C0, double N0, int k_cap) {
  if (k_cap < 1) throw std::invalid_argument("check_diophantine: k_cap must be >= 1");
  DiophantineReport rep;
  double worst = std::numeric_limits<double>::infinity();
  double worst_k2 = std::numeric_limits<double>::infinity();
  for (int k1 = -k_cap; k1 <= k_cap; ++k1) {
    for (int k2 = -k_cap; k2 <= k_cap; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      Vec2i k{k1, k2};
      double val = std::abs(num::dot(a, k)) * std::pow(num::norm2(k), N0);
      double kk = double(k1) * k1 + double(k2) * k2;
      // Ties broken toward the shortest mode (canonical sign below).
      bool better = val < worst * (1.0 - 1e-12) ||
                    (val <= worst * (1.0 + 1e-12) && kk < worst_k2);
      if (better) {
        worst = std::min(worst, val);
        worst_k2 = kk;
        if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) k = Vec2i{-k[0], -k[1]};
        rep.worst_mode = k;
      }
    }
  }
  rep.worst_ratio = C0 * worst;
  rep.ok = rep.worst_ratio >= 1.0;
  return rep;
}

FrequencyVector certify(const Vec2& a, double C0, double N0, int k_cap) {
  auto rep = check_diophantine(a, C0, N0, k_cap);
  if (!rep.ok)
    throw std::invalid_argument("certify: frequency fails the Diophantine condition at mode (" +
                                std::to_string(rep.worst_mode[0]) + "," +
                                std::to_string(rep.worst_mode[1]) + ")");
  FrequencyVector f(a, C0, N0);
  f.certified_cap = k_cap;
  return f;
}

// ---------------------------------------------------------------------------
// Flow and resonant averages
// ---------------------------------------------------------------------------

ClassicalSymbol flow_average(const ClassicalSymbol& q, const ClassicalSymbol& p_N, double T,
                             const SmoothingKernel& K) {
  if (p_N.x_dependent_part().max_abs_coeff() > 0)
    throw std::invalid_argument("flow_average: p_N must be x-independent");
  if (!(T > 0)) throw std::invalid_argument("flow_average: T must be positive");
  // Zeroth-order frequency a_N = Re d_xi p_N at xi = 0, eps = 0.
  Vec2 aN{0.0, 0.0};
  for (int j = 0; j < 2; ++j)
    aN[j] = p_N.derivative_xi(j).evaluate(Vec2{0, 0}, Vec2{0, 0}, 0.0).real();
  ClassicalSymbol out(q.caps());
  for (const auto& [key, c] : q.terms()) {
    if (key.k[0] == 0 && key.k[1] == 0) {
      out.accumulate(key, c);
    } else {
      out.accumulate(key, c * K.hat_complex(T * num::dot(aN, key.k)));
    }
  }
  if (q.real_on_real() && out.check_real_on_real()) out.set_real_on_real(true);
  out.prune();
  return out;
}

ClassicalSymbol resonant_average(const ClassicalSymbol& q, Vec2i b) {
  if (b[0] == 0 && b[1] == 0)
    throw std::invalid_argument("resonant_average: direction b must be nonzero");
  int g = gcd_i(b[0], b[1]);
  b = {b[0] / g, b[1] / g};
  ClassicalSymbol out(q.caps());
  for (const auto& [key, c] : q.terms())
    if (b[0] * key.k[0] + b[1] * key.k[1] == 0) out.accumulate(key, c);
  if (q.real_on_real()) out.set_real_on_real(true);
  return out;
}

IntervalSet q_infinity_range(const ClassicalSymbol& q_on_torus, Vec2i b, int grid) {
  for (const auto& [key, c] : q_on_torus.terms())
    if (key.xi_degree() != 0 || key.m != 0)
      throw std::invalid_argument("q_infinity_range: symbol must be a pure torus function");
  if (b[0] == 0 && b[1] == 0) throw std::invalid_argument("q_infinity_range: zero direction");
  int g = gcd_i(b[0], b[1]);
  b = {b[0] / g, b[1] / g};
  ClassicalSymbol res = resonant_average(q_on_torus, b);
  // Resonant modes are multiples of k_perp = (b2, -b1): a 1-D trigonometric
  // polynomial in t = k_perp . x.
  const Vec2i kperp{b[1], -b[0]};
  std::map<int, Cplx> line;
  for (const auto& [key, c] : res.terms()) {
    int j;
    if (kperp[0] != 0)
      j = key.k[0] / kperp[0];
    else
      j = key.k[1] / kperp[1];
    line[j] += c;
  }
  auto eval_line = [&](double t) {
    Cplx v = 0;
    for (const auto& [j, c] : line) v += c * std::exp(Cplx(0, j * t));
    return v.real();
  };
  int n = std::max(grid, 8);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int refine = 0; refine < 16; ++refine) {
    double new_lo = std::numeric_limits<double>::infinity(), new_hi = -new_lo;
    for (int i = 0; i < n; ++i) {
      double v = eval_line(2 * M_PI * i / n);
      new_lo = std::min(new_lo, v);
      new_hi = std::max(new_hi, v);
    }
    bool stable = refine > 0 && std::abs(new_lo - lo) < 1e-8 && std::abs(new_hi - hi) < 1e-8;
    lo = new_lo;
    hi = new_hi;
    if (stable) break;
    n *= 2;
  }
  IntervalSet out;
  out.add(lo, hi);
  return out;
}

IntervalSet q_infinity_range(const ClassicalSymbol& q_on_torus, const FrequencyVector& b) {
  if (b.certified_cap <= 0)
    throw std::invalid_argument("q_infinity_range: frequency must be certified Diophantine");
  double v = q_on_torus.torus_average().evaluate(Vec2{0, 0}, Vec2{0, 0}, 0.0).real();
  IntervalSet out;
  out.add(v, v);
  return out;
}

// ---------------------------------------------------------------------------
// Harmonic-oscillator quartic averages
// ---------------------------------------------------------------------------

ActionQuadratic harmonic_quartic_average(const QuarticForm& v) {
  return ActionQuadratic{1.5 * v.v40, v.v22, 1.5 * v.v04};
}

std::vector<double> critical_values(const Vec2& lambda, const QuarticForm& v) {
  if (!(lambda[0] > 0 && lambda[1] > 0))
    throw std::invalid_argument("critical_values: lambda components must be positive");
  std::vector<double> out;
  out.push_back(1.5 * v.v04 / (lambda[1] * lambda[1]));  // A1, at I1 = 0
  out.push_back(1.5 * v.v40 / (lambda[0] * lambda[0]));  // A2, at I2 = 0
  const double c1 = lambda[0] * v.v22 - 3.0 * lambda[1] * v.v40;
  const double c2 = lambda[1] * v.v22 - 3.0 * lambda[0] * v.v04;
  if (c1 * c2 > 0.0) {
    // Critical line c1 I1 = c2 I2 meets the open quadrant: I = t (c2, c1),
    // with t fixed by lambda . I = 1.
    const double t = 1.0 / (lambda[0] * c2 + lambda[1] * c1);
    const double I1 = t * c2, I2 = t * c1;
    out.push_back(harmonic_quartic_average(v).eval(I1, I2));  // A3
  }
  return out;
}

// ---------------------------------------------------------------------------
// Completely integrable global condition
// ---------------------------------------------------------------------------

IntegrableConditionReport verify_integrable_condition(
    const std::function<ClassicalSymbol(double)>& q_family,
    const std::function<TorusFrequency(double)>& omega, double F0, double b_tilde, double b,
    int grid) {
  if (!(0 < b_tilde && b_tilde < b))
    throw std::invalid_argument("verify_integrable_condition: need 0 < b_tilde < b");
  grid = std::max(grid, 2);
  auto range_at = [&](double mu) -> IntervalSet {
    ClassicalSymbol q = q_family(mu);
    TorusFrequency w = omega(mu);
    if (w.has_value()) return q_infinity_range(q, *w);
    double v = q.torus_average().evaluate(Vec2{0, 0}, Vec2{0, 0}, 0.0).real();
    IntervalSet s;
    s.add(v, v);
    return s;
  };
  double margin_plus = std::numeric_limits<double>::infinity();
  double margin_minus = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    double mu = b_tilde + (b - b_tilde) * i / (grid - 1);
    margin_plus = std::min(margin_plus, range_at(mu).lo() - F0);
    margin_minus = std::min(margin_minus, F0 - range_at(-mu).hi());
  }
  IntegrableConditionReport rep;
  rep.margin = std::min(margin_plus, margin_minus);
  rep.ok = margin_plus > 0 && margin_minus > 0;
  return rep;
}

}  // namespace speclab::averaging
