#include "speclab/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace speclab::num {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  // Newton iteration from the Chebyshev initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  auto [pos, ok] = cache.emplace(n, std::make_pair(std::move(x), std::move(w)));
  (void)ok;
  return pos->second;
}

template <typename T>
static T integrate_gl_impl(const std::function<T(double)>& f, double a, double b, int panels,
                           int order) {
  const auto& [xs, ws] = gauss_legendre(order);
  T total{};
  const double dx = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * dx;
    const double mid = lo + 0.5 * dx, half = 0.5 * dx;
    for (int i = 0; i < order; ++i) total += T(ws[i] * half) * f(mid + half * xs[i]);
  }
  return total;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    int order) {
  return integrate_gl_impl<double>(f, a, b, panels, order);
}

Cplx integrate_gl_complex(const std::function<Cplx(double)>& f, double a, double b, int panels,
                  int order) {
  return integrate_gl_impl<Cplx>(f, a, b, panels, order);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_panels) {
  double prev = integrate_gl(f, a, b, 1, 16);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    double cur = integrate_gl(f, a, b, panels, 16);
    double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                 int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw std::invalid_argument("find_root: endpoints do not bracket a root");
  for (int i = 0; i < max_iter; ++i) {
    double mid = 0.5 * (lo + hi);
    // Secant proposal, accepted only when it stays inside the bracket.
    double sec = (std::abs(fhi - flo) > 0) ? (lo - flo * (hi - lo) / (fhi - flo)) : mid;
    double x = (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) ? sec : mid;
    double fx = f(x);
    if (fx == 0.0 || hi - lo < tol) return x;
    if (flo * fx < 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
  }
  return 0.5 * (lo + hi);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x, std::int64_t q_cap,
                                                               int max_terms) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  double t = x;
  std::int64_t pa = 0, qa = 1, pb = 1, qb = 0;  // h_{-2}/k_{-2}, h_{-1}/k_{-1}
  for (int i = 0; i < max_terms; ++i) {
    double fl = std::floor(t);
    if (fl > 9.2e17 || fl < -9.2e17) break;
    std::int64_t a = (std::int64_t)fl;
    std::int64_t p = a * pb + pa;
    std::int64_t q = a * qb + qa;
    if (q > q_cap || q < 0) break;
    out.emplace_back(p, q);
    pa = pb;
    qa = qb;
    pb = p;
    qb = q;
    double frac = t - fl;
    if (frac < 1e-15) break;
    t = 1.0 / frac;
  }
  return out;
}

MonotoneCubic::MonotoneCubic(std::vector<double> s, std::vector<double> f)
    : s_(std::move(s)), f_(std::move(f)) {
  const std::size_t n = s_.size();
  if (n < 2 || f_.size() != n) throw std::invalid_argument("MonotoneCubic: bad sample arrays");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(s_[i + 1] > s_[i])) throw std::invalid_argument("MonotoneCubic: abscissae not increasing");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (f_[i + 1] - f_[i]) / (s_[i + 1] - s_[i]);
  d_.resize(n);
  d_[0] = delta[0];
  d_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    d_[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  // Fritsch-Carlson limiter.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      d_[i] = d_[i + 1] = 0.0;
      continue;
    }
    double a = d_[i] / delta[i], b = d_[i + 1] / delta[i];
    double r = a * a + b * b;
    if (r > 9.0) {
      double tau = 3.0 / std::sqrt(r);
      d_[i] = tau * a * delta[i];
      d_[i + 1] = tau * b * delta[i];
    }
  }
}

std::size_t MonotoneCubic::locate(double x) const {
  auto it = std::upper_bound(s_.begin(), s_.end(), x);
  std::size_t i = (it == s_.begin()) ? 0 : std::size_t(it - s_.begin()) - 1;
  return std::min(i, s_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  std::size_t i = locate(x);
  double h = s_[i + 1] - s_[i], t = (x - s_[i]) / h;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * f_[i] + h10 * h * d_[i] + h01 * f_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  std::size_t i = locate(x);
  double h = s_[i + 1] - s_[i], t = (x - s_[i]) / h;
  double g00 = (6 * t * t - 6 * t) / h, g10 = 3 * t * t - 4 * t + 1;
  double g01 = (6 * t - 6 * t * t) / h, g11 = 3 * t * t - 2 * t;
  return g00 * f_[i] + g10 * d_[i] + g01 * f_[i + 1] + g11 * d_[i + 1];
}

std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n_rows = (int)cost.size();
  if (n_rows == 0) return {};
  const int n_cols = (int)cost[0].size();
  const int n = std::max(n_rows, n_cols);
  double pad = 0.0;
  for (const auto& row : cost)
    for (double c : row) pad = std::max(pad, std::abs(c));
  pad = 2.0 * pad * n + 1.0;

  // Jonker-Volgenant style shortest augmenting path, O(n^3).
  auto C = [&](int i, int j) -> double {
    if (i < n_rows && j < n_cols) return cost[i][j];
    return pad;
  };
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = C(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n_rows, -1);
  for (int j = 1; j <= n; ++j) {
    int i = p[j];
    if (i >= 1 && i <= n_rows && j <= n_cols) row_to_col[i - 1] = j - 1;
  }
  return row_to_col;
}

namespace {
std::atomic<int> g_default_threads{0};
}

void set_default_threads(int threads) { g_default_threads.store(threads); }

int default_threads() {
  int t = g_default_threads.load();
  if (t > 0) return t;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : (int)hc;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads) {
  if (n == 0) return;
  int nt = threads > 0 ? threads : default_threads();
  nt = (int)std::min<std::size_t>(nt, n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace speclab::num
