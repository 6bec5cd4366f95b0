#include "speclab/symbol.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "json.hpp"

namespace speclab::symbols {

namespace {

bool within_caps(const SymbolKey& key, const SymbolCaps& caps) {
  return num::norm_inf(key.k) <= caps.k_max && key.xi_degree() <= caps.n_xi && key.m <= caps.m_eps;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

ClassicalSymbol ClassicalSymbol::constant(SymbolCaps caps, Cplx c) {
  ClassicalSymbol s(caps);
  if (c != 0.0) s.set(SymbolKey{}, c);
  if (c.imag() == 0.0) s.set_real_on_real(true);
  return s;
}

ClassicalSymbol ClassicalSymbol::xi(SymbolCaps caps, int j) {
  ClassicalSymbol s(caps);
  SymbolKey key;
  key.alpha[j] = 1;
  s.set(key, 1.0);
  s.set_real_on_real(true);
  return s;
}

ClassicalSymbol ClassicalSymbol::monomial(SymbolCaps caps, Vec2i k, Vec2i alpha, int m, Cplx c) {
  ClassicalSymbol s(caps);
  s.set(SymbolKey{k, alpha, m}, c);
  if (k[0] == 0 && k[1] == 0 && c.imag() == 0.0) s.set_real_on_real(true);
  return s;
}

ClassicalSymbol ClassicalSymbol::cosine(SymbolCaps caps, Vec2i k) {
  ClassicalSymbol s(caps);
  s.set(SymbolKey{k, {0, 0}, 0}, 0.5);
  s.set(SymbolKey{{-k[0], -k[1]}, {0, 0}, 0}, 0.5);
  s.set_real_on_real(true);
  return s;
}

ClassicalSymbol ClassicalSymbol::sine(SymbolCaps caps, Vec2i k) {
  ClassicalSymbol s(caps);
  s.set(SymbolKey{k, {0, 0}, 0}, Cplx(0.0, -0.5));
  s.set(SymbolKey{{-k[0], -k[1]}, {0, 0}, 0}, Cplx(0.0, 0.5));
  s.set_real_on_real(true);
  return s;
}

Cplx ClassicalSymbol::coeff(const SymbolKey& key) const {
  auto it = coeffs_.find(key);
  return it == coeffs_.end() ? Cplx(0.0) : it->second;
}

void ClassicalSymbol::set(const SymbolKey& key, Cplx c) {
  if (!within_caps(key, caps_)) throw std::out_of_range("ClassicalSymbol::set: key exceeds caps");
  if (key.alpha[0] < 0 || key.alpha[1] < 0 || key.m < 0)
    throw std::out_of_range("ClassicalSymbol::set: negative exponent");
  real_on_real_ = false;  // single-key edits break the symmetry; re-flag explicitly
  if (c == 0.0)
    coeffs_.erase(key);
  else
    coeffs_[key] = c;
}

void ClassicalSymbol::accumulate(const SymbolKey& key, Cplx c) {
  real_on_real_ = false;
  if (c == 0.0) return;
  if (!within_caps(key, caps_)) {
    truncated_ = true;
    return;
  }
  auto [it, inserted] = coeffs_.emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) coeffs_.erase(it);
  }
}

void ClassicalSymbol::set_real_on_real(bool flag, double tol) {
  if (flag && !check_real_on_real(tol))
    throw std::invalid_argument("symbol flagged real-on-real violates the coefficient symmetry");
  real_on_real_ = flag;
}

bool ClassicalSymbol::check_real_on_real(double tol) const {
  const double scale = std::max(max_abs_coeff(), 1.0);
  for (const auto& [key, c] : coeffs_) {
    SymbolKey mirror{{-key.k[0], -key.k[1]}, key.alpha, key.m};
    if (std::abs(coeff(mirror) - std::conj(c)) > tol * scale) return false;
  }
  return true;
}

ClassicalSymbol& ClassicalSymbol::operator+=(const ClassicalSymbol& o) {
  if (!(caps_ == o.caps_)) throw cap_mismatch();
  const bool flag = real_on_real_ && o.real_on_real_;
  for (const auto& [key, c] : o.coeffs_) accumulate(key, c);
  truncated_ = truncated_ || o.truncated_;
  real_on_real_ = flag;
  return *this;
}

ClassicalSymbol& ClassicalSymbol::operator-=(const ClassicalSymbol& o) {
  if (!(caps_ == o.caps_)) throw cap_mismatch();
  const bool flag = real_on_real_ && o.real_on_real_;
  for (const auto& [key, c] : o.coeffs_) accumulate(key, -c);
  truncated_ = truncated_ || o.truncated_;
  real_on_real_ = flag;
  return *this;
}

ClassicalSymbol& ClassicalSymbol::operator*=(Cplx c) {
  if (c == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [key, v] : coeffs_) v *= c;
  real_on_real_ = real_on_real_ && (c.imag() == 0.0);
  return *this;
}

ClassicalSymbol operator*(const ClassicalSymbol& a, const ClassicalSymbol& b) {
  if (!(a.caps_ == b.caps_)) throw cap_mismatch();
  ClassicalSymbol out(a.caps_);
  for (const auto& [ka, ca] : a.coeffs_) {
    for (const auto& [kb, cb] : b.coeffs_) {
      SymbolKey key{{ka.k[0] + kb.k[0], ka.k[1] + kb.k[1]},
                    {ka.alpha[0] + kb.alpha[0], ka.alpha[1] + kb.alpha[1]},
                    ka.m + kb.m};
      out.accumulate(key, ca * cb);
    }
  }
  out.truncated_ = out.truncated_ || a.truncated_ || b.truncated_;
  out.real_on_real_ = a.real_on_real_ && b.real_on_real_;
  out.prune();
  return out;
}

ClassicalSymbol ClassicalSymbol::derivative_x(int j) const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_)
    if (key.k[j] != 0) out.accumulate(key, Cplx(0.0, double(key.k[j])) * c);
  out.truncated_ = truncated_;
  out.real_on_real_ = real_on_real_;
  return out;
}

ClassicalSymbol ClassicalSymbol::derivative_xi(int j) const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_) {
    if (key.alpha[j] == 0) continue;
    SymbolKey dkey = key;
    dkey.alpha[j] -= 1;
    out.accumulate(dkey, double(key.alpha[j]) * c);
  }
  out.truncated_ = truncated_;
  out.real_on_real_ = real_on_real_;
  return out;
}

Cplx ClassicalSymbol::evaluate(const Vec2& x, const CVec2& xi, double eps) const {
  Cplx total = 0.0;
  for (const auto& [key, c] : coeffs_) {
    double phase = key.k[0] * x[0] + key.k[1] * x[1];
    Cplx term = c * Cplx(std::cos(phase), std::sin(phase));
    for (int r = 0; r < key.alpha[0]; ++r) term *= xi[0];
    for (int r = 0; r < key.alpha[1]; ++r) term *= xi[1];
    for (int r = 0; r < key.m; ++r) term *= eps;
    total += term;
  }
  return total;
}

Cplx ClassicalSymbol::evaluate(const Vec2& x, const Vec2& xi, double eps) const {
  return evaluate(x, CVec2{Cplx(xi[0]), Cplx(xi[1])}, eps);
}

double ClassicalSymbol::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [key, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

void ClassicalSymbol::prune(double rel_tol) {
  const double cut = rel_tol * max_abs_coeff();
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (std::abs(it->second) <= cut)
      it = coeffs_.erase(it);
    else
      ++it;
  }
}

int ClassicalSymbol::min_degree() const {
  int d = INT_MAX;
  for (const auto& [key, c] : coeffs_) d = std::min(d, key.degree());
  return d;
}

int ClassicalSymbol::max_degree() const {
  int d = -1;
  for (const auto& [key, c] : coeffs_) d = std::max(d, key.degree());
  return d;
}

ClassicalSymbol ClassicalSymbol::degree_part(int d) const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_)
    if (key.degree() == d) out.accumulate(key, c);
  out.real_on_real_ = real_on_real_;
  return out;
}

ClassicalSymbol ClassicalSymbol::truncate_degree(int max_deg) const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_)
    if (key.degree() <= max_deg) out.accumulate(key, c);
  out.truncated_ = truncated_;
  out.real_on_real_ = real_on_real_;
  return out;
}

ClassicalSymbol ClassicalSymbol::x_dependent_part() const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_)
    if (key.k[0] != 0 || key.k[1] != 0) out.accumulate(key, c);
  out.real_on_real_ = real_on_real_;
  return out;
}

ClassicalSymbol ClassicalSymbol::torus_average() const {
  ClassicalSymbol out(caps_);
  for (const auto& [key, c] : coeffs_)
    if (key.k[0] == 0 && key.k[1] == 0) out.accumulate(key, c);
  out.truncated_ = truncated_;
  out.real_on_real_ = real_on_real_;
  return out;
}

std::string ClassicalSymbol::to_json() const {
  nlohmann::json j;
  j["caps"] = {{"k_max", caps_.k_max}, {"n_xi", caps_.n_xi}, {"m_eps", caps_.m_eps}};
  j["real_on_real"] = real_on_real_;
  auto terms = nlohmann::json::array();
  for (const auto& [key, c] : coeffs_) {
    terms.push_back({{"k", {key.k[0], key.k[1]}},
                     {"alpha", {key.alpha[0], key.alpha[1]}},
                     {"m", key.m},
                     {"re", c.real()},
                     {"im", c.imag()}});
  }
  j["terms"] = std::move(terms);
  return j.dump();
}

ClassicalSymbol ClassicalSymbol::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SymbolCaps caps{j.at("caps").at("k_max").get<int>(), j.at("caps").at("n_xi").get<int>(),
                  j.at("caps").at("m_eps").get<int>()};
  ClassicalSymbol s(caps);
  for (const auto& t : j.at("terms")) {
    SymbolKey key{{t.at("k")[0].get<int>(), t.at("k")[1].get<int>()},
                  {t.at("alpha")[0].get<int>(), t.at("alpha")[1].get<int>()},
                  t.at("m").get<int>()};
    s.set(key, Cplx(t.at("re").get<double>(), t.value("im", 0.0)));
  }
  if (j.value("real_on_real", false)) s.set_real_on_real(true);
  return s;
}

ClassicalSymbol poisson_bracket(const ClassicalSymbol& f, const ClassicalSymbol& g) {
  if (!(f.caps() == g.caps())) throw cap_mismatch();
  ClassicalSymbol out(f.caps());
  for (int j = 0; j < 2; ++j) {
    out += f.derivative_xi(j) * g.derivative_x(j);
    out -= f.derivative_x(j) * g.derivative_xi(j);
  }
  out.set_real_on_real(false);
  if (f.real_on_real() && g.real_on_real() && out.check_real_on_real()) out.set_real_on_real(true);
  out.prune();
  return out;
}

ClassicalSymbol exp_hamiltonian_compose(const ClassicalSymbol& p, const ClassicalSymbol& G,
                                        int total_degree) {
  if (!(p.caps() == G.caps())) throw cap_mismatch();
  if (!G.empty() && G.min_degree() < 2)
    throw std::invalid_argument(
        "exp_hamiltonian_compose: generator must vanish to order >= 2 in (xi,eps)");
  ClassicalSymbol sum = p.truncate_degree(total_degree);
  ClassicalSymbol term = sum;
  // Each H_G application raises the minimum (xi,eps)-degree by at least 1,
  // so the loop is finite at any fixed truncation degree.
  for (int k = 1; k <= total_degree + 1; ++k) {
    term = poisson_bracket(G, term);
    term *= Cplx(1.0 / k);
    term = term.truncate_degree(total_degree);
    if (term.empty()) break;
    sum += term;
  }
  sum.prune();
  return sum;
}

OperatorSymbol::OperatorSymbol(std::vector<ClassicalSymbol> terms) : h_terms(std::move(terms)) {
  validate();
}

const SymbolCaps& OperatorSymbol::caps() const {
  if (h_terms.empty()) throw std::logic_error("OperatorSymbol: empty h-expansion");
  return h_terms.front().caps();
}

void OperatorSymbol::validate() const {
  if (h_terms.empty()) throw std::invalid_argument("OperatorSymbol: h_terms must be nonempty");
  for (const auto& t : h_terms)
    if (!(t.caps() == h_terms.front().caps())) throw cap_mismatch();
}

ClassicalSymbol& OperatorSymbol::term(std::size_t n) { return h_terms.at(n); }
const ClassicalSymbol& OperatorSymbol::term(std::size_t n) const { return h_terms.at(n); }

void OperatorSymbol::ensure_term(std::size_t n) {
  while (h_terms.size() <= n) h_terms.emplace_back(ClassicalSymbol::zero(caps()));
}

OperatorSymbol& OperatorSymbol::operator+=(const OperatorSymbol& o) {
  ensure_term(o.h_terms.size() - 1);
  for (std::size_t n = 0; n < o.h_terms.size(); ++n) h_terms[n] += o.h_terms[n];
  return *this;
}

OperatorSymbol& OperatorSymbol::operator-=(const OperatorSymbol& o) {
  ensure_term(o.h_terms.size() - 1);
  for (std::size_t n = 0; n < o.h_terms.size(); ++n) h_terms[n] -= o.h_terms[n];
  return *this;
}

OperatorSymbol& OperatorSymbol::operator*=(Cplx c) {
  for (auto& t : h_terms) t *= c;
  return *this;
}

OperatorSymbol OperatorSymbol::h_shift(std::size_t n) const {
  OperatorSymbol out;
  out.h_terms.assign(n, ClassicalSymbol::zero(caps()));
  for (const auto& t : h_terms) out.h_terms.push_back(t);
  return out;
}

Cplx OperatorSymbol::evaluate(const Vec2& x, const CVec2& xi, double eps, double h) const {
  Cplx total = 0.0;
  double hn = 1.0;
  for (const auto& t : h_terms) {
    total += hn * t.evaluate(x, xi, eps);
    hn *= h;
  }
  return total;
}

bool OperatorSymbol::x_independent(double tol) const {
  for (const auto& t : h_terms)
    if (t.x_dependent_part().max_abs_coeff() > tol) return false;
  return true;
}

double OperatorSymbol::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& t : h_terms) m = std::max(m, t.max_abs_coeff());
  return m;
}

void OperatorSymbol::prune(double rel_tol) {
  const double cut = rel_tol * max_abs_coeff();
  for (auto& t : h_terms) {
    ClassicalSymbol kept(t.caps());
    for (const auto& [key, c] : t.terms())
      if (std::abs(c) > cut) kept.accumulate(key, c);
    if (t.truncated()) kept.mark_truncated();
    if (t.real_on_real()) kept.set_real_on_real(true);
    t = kept;
  }
}

std::string OperatorSymbol::to_json() const {
  nlohmann::json j;
  auto arr = nlohmann::json::array();
  for (const auto& t : h_terms) arr.push_back(nlohmann::json::parse(t.to_json()));
  j["h_terms"] = std::move(arr);
  return j.dump();
}

OperatorSymbol OperatorSymbol::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<ClassicalSymbol> terms;
  for (const auto& t : j.at("h_terms")) terms.push_back(ClassicalSymbol::from_json(t.dump()));
  return OperatorSymbol(std::move(terms));
}

namespace {

// Pi^n(f,g) = sum_{|beta|+|gamma|=n} n!/(beta! gamma!) (-1)^{|gamma|}
//             (d_xi^beta d_x^gamma f)(d_x^beta d_xi^gamma g),
// the n-th power of the Poisson bidifferential operator.
ClassicalSymbol moyal_bidiff(const ClassicalSymbol& f, const ClassicalSymbol& g, int n) {
  ClassicalSymbol out(f.caps());
  for (int b1 = 0; b1 <= n; ++b1)
    for (int b2 = 0; b1 + b2 <= n; ++b2)
      for (int g1 = 0; b1 + b2 + g1 <= n; ++g1) {
        int g2 = n - b1 - b2 - g1;
        double w = factorial(n) / (factorial(b1) * factorial(b2) * factorial(g1) * factorial(g2));
        if ((g1 + g2) % 2) w = -w;
        ClassicalSymbol df = f;
        for (int r = 0; r < b1; ++r) df = df.derivative_xi(0);
        for (int r = 0; r < b2; ++r) df = df.derivative_xi(1);
        for (int r = 0; r < g1; ++r) df = df.derivative_x(0);
        for (int r = 0; r < g2; ++r) df = df.derivative_x(1);
        if (df.empty()) continue;
        ClassicalSymbol dg = g;
        for (int r = 0; r < b1; ++r) dg = dg.derivative_x(0);
        for (int r = 0; r < b2; ++r) dg = dg.derivative_x(1);
        for (int r = 0; r < g1; ++r) dg = dg.derivative_xi(0);
        for (int r = 0; r < g2; ++r) dg = dg.derivative_xi(1);
        if (dg.empty()) continue;
        out += Cplx(w) * (df * dg);
      }
  return out;
}

}  // namespace

OperatorSymbol moyal_bracket(const OperatorSymbol& f, const OperatorSymbol& g, int h_order) {
  if (h_order < 0) throw std::invalid_argument("moyal_bracket: h_order must be >= 0");
  if (!(f.caps() == g.caps())) throw cap_mismatch();
  OperatorSymbol out;
  out.h_terms.assign(h_order + 1, ClassicalSymbol::zero(f.caps()));
  // (1/ih)[F,G] = sum_{j odd} (1/j!) (i/2)^{j-1} h^{j-1} Pi^j(f,g),
  // expanded over the h-terms of f and g.
  for (std::size_t a = 0; a < f.h_terms.size(); ++a) {
    for (std::size_t b = 0; b < g.h_terms.size(); ++b) {
      for (int j = 1; (int)(a + b) + j - 1 <= h_order; j += 2) {
        Cplx w = std::pow(Cplx(0.0, 0.5), j - 1) / factorial(j);
        ClassicalSymbol term = moyal_bidiff(f.h_terms[a], g.h_terms[b], j);
        out.h_terms[a + b + j - 1] += w * term;
      }
    }
  }
  out.prune();
  return out;
}

}  // namespace speclab::symbols
