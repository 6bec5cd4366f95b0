#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace speclab::num {

using Cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;
using Vec2i = std::array<int, 2>;
using CVec2 = std::array<Cplx, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double dot(const Vec2& a, const Vec2i& k) { return a[0] * k[0] + a[1] * k[1]; }
inline Cplx dot(const CVec2& a, const Vec2i& k) { return a[0] * double(k[0]) + a[1] * double(k[1]); }
inline double norm2(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double norm2(const Vec2i& k) { return std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1]); }
inline int norm_inf(const Vec2i& k) { return std::max(std::abs(k[0]), std::abs(k[1])); }

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
/// Results are cached per n; the returned reference stays valid.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

/// Integrate f over [a,b] with `panels` equal panels of n-point Gauss-Legendre.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels = 8, int order = 16);
Cplx integrate_gl_complex(const std::function<Cplx(double)>& f, double a, double b,
                  int panels = 8, int order = 16);

/// Integrate with panel doubling until two refinements agree to rel_tol (or abs floor).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, int max_panels = 4096);

/// Bisection + secant polish for a root of f on [lo,hi]; f(lo), f(hi) must bracket.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-14, int max_iter = 200);

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Continued-fraction convergents p/q of x with q <= q_cap.
std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x, std::int64_t q_cap,
                                                               int max_terms = 64);

/// Monotone (Fritsch-Carlson) piecewise-cubic interpolant for sampled data.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> s, std::vector<double> f);
  double operator()(double x) const;
  double derivative(double x) const;

 private:
  std::vector<double> s_, f_, d_;
  std::size_t locate(double x) const;
};

/// Minimum-cost perfect matching on an n x m cost matrix (padded square internally).
/// Returns for each row the assigned column, or -1 when unmatched.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

/// Run fn(i) for i in [0,n) on up to `threads` threads (0 = hardware concurrency).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

/// Process-wide default thread count used by parallel_for when threads == 0.
void set_default_threads(int threads);
int default_threads();

}  // namespace speclab::num
