#include "speclab/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace speclab::quantization {

std::vector<LatticePoint> lattice_points(const QuantizationData& qd, std::size_t point_cap) {
  qd.validate();
  // Bounding box of k-space indices reaching |xi_k| <= R.
  auto k_bounds = [&](int j) {
    double center = (qd.S[j] / (2 * M_PI)) / qd.h + qd.k0[j] / 4.0;
    double span = qd.window_radius / qd.h;
    return std::pair<long, long>{(long)std::floor(center - span) - 1,
                                 (long)std::ceil(center + span) + 1};
  };
  auto [lo1, hi1] = k_bounds(0);
  auto [lo2, hi2] = k_bounds(1);
  const std::size_t box = (std::size_t)std::max<long>(0, hi1 - lo1 + 1) *
                          (std::size_t)std::max<long>(0, hi2 - lo2 + 1);
  if (box > 16 * point_cap)
    throw std::invalid_argument("lattice_points: window too large (index box " +
                                std::to_string(box) + ")");
  std::vector<LatticePoint> out;
  for (long k1 = lo1; k1 <= hi1; ++k1) {
    for (long k2 = lo2; k2 <= hi2; ++k2) {
      Vec2i k{(int)k1, (int)k2};
      Vec2 xi = qd.xi_of(k);
      if (num::norm2(xi) <= qd.window_radius) {
        out.push_back({k, xi});
        if (out.size() > point_cap)
          throw std::invalid_argument("lattice_points: point count cap exceeded");
      }
    }
  }
  return out;
}

SpectralCloud quasi_eigenvalues(const NormalFormResult& nf, const QuantizationData& qd,
                                const Rectangle& rect) {
  rect.validate();
  SpectralCloud cloud;
  const auto pts = lattice_points(qd);
  for (const auto& pt : pts) {
    CVec2 xi{Cplx(pt.xi[0]), Cplx(pt.xi[1])};
    Cplx z = nf.p_normal.evaluate(Vec2{0, 0}, xi, qd.eps, qd.h);
    if (!rect.contains(z)) continue;
    SpectralPoint sp;
    sp.z = z;
    sp.label = pt.k;
    sp.source = CloudSource::lattice;
    const double s = std::max({num::norm2(pt.xi), qd.eps, qd.h});
    sp.err_budget = nf.remainder_norm * std::pow(s, nf.order_N + 1);
    cloud.points.push_back(sp);
  }
  return cloud;
}

RescaledTermSet make_rescaled_terms(const NormalFormResult& nf, double eps, double eps_tilde) {
  if (!(eps_tilde > 0)) throw std::invalid_argument("make_rescaled_terms: eps_tilde must be positive");
  RescaledTermSet set;
  set.eps_tilde = eps_tilde;
  for (std::size_t n = 0; n < nf.p_normal.h_terms.size(); ++n) {
    symbols::ClassicalSymbol s_n = nf.p_normal.h_terms[n];
    set.terms.push_back([s_n, eps, n](CVec2 eta, double et) -> Cplx {
      CVec2 xi{eta[0] * et, eta[1] * et};
      return std::pow(et, double(n) - 1.0) * s_n.evaluate(Vec2{0, 0}, xi, eps);
    });
  }
  return set;
}

SpectralCloud rescaled_quasi_eigenvalues(const RescaledTermSet& terms, const QuantizationData& qd,
                                         int N1, const Rectangle& rect,
                                         std::vector<double>* term_magnitudes) {
  rect.validate();
  if (N1 < 0 || terms.terms.empty())
    throw std::invalid_argument("rescaled_quasi_eigenvalues: need N1 >= 0 and nonempty terms");
  const double et = terms.eps_tilde;

  // Homogeneity law mu^{1-n} p~_n(eta/mu, mu et) = p~_n(eta, et), two mu values.
  const CVec2 probes[3] = {{Cplx(0.3 * et), Cplx(0.1 * et)},
                           {Cplx(-0.2 * et), Cplx(0.25 * et)},
                           {Cplx(0.05 * et), Cplx(-0.15 * et)}};
  for (int n = 0; n <= std::min<int>(N1, (int)terms.terms.size() - 1); ++n) {
    for (double mu : {0.5, 2.0}) {
      for (const auto& eta : probes) {
        Cplx direct = terms.terms[n](eta, et);
        CVec2 scaled_eta{eta[0] / mu, eta[1] / mu};
        Cplx via = std::pow(mu, 1.0 - double(n)) * terms.terms[n](scaled_eta, mu * et);
        double scale = std::max({std::abs(direct), std::abs(via), 1.0});
        if (std::abs(direct - via) > 1e-10 * scale)
          throw homogeneity_error("rescaled term n=" + std::to_string(n) +
                                  " violates the scaling law (|delta| = " +
                                  std::to_string(std::abs(direct - via)) + ")");
      }
    }
  }

  SpectralCloud cloud;
  const int n_top = std::min<int>(N1, (int)terms.terms.size() - 1);
  if (term_magnitudes) term_magnitudes->assign(n_top + 1, 0.0);
  for (const auto& pt : lattice_points(qd)) {
    // p~_n(xi, 1, eps) = et^{1-n} p~_n(xi/et, et).
    Cplx z = 0.0;
    double hn = 1.0;
    for (int n = 0; n <= n_top; ++n) {
      CVec2 eta{Cplx(pt.xi[0] / et), Cplx(pt.xi[1] / et)};
      Cplx val = std::pow(et, 1.0 - double(n)) * terms.terms[n](eta, et);
      if (term_magnitudes)
        (*term_magnitudes)[n] = std::max((*term_magnitudes)[n], std::abs(val));
      z += hn * val;
      hn *= qd.h;
    }
    if (!rect.contains(z)) continue;
    SpectralPoint sp;
    sp.z = z;
    sp.label = pt.k;
    sp.source = CloudSource::lattice;
    cloud.points.push_back(sp);
  }
  return cloud;
}

std::string cloud_to_csv(const SpectralCloud& cloud, const QuantizationData& qd) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(15);
  os << "k1,k2,xi1,xi2,re_z,im_z,err_budget\n";
  for (const auto& p : cloud.points) {
    Vec2i k = p.label.value_or(Vec2i{0, 0});
    Vec2 xi = p.label ? qd.xi_of(*p.label) : Vec2{0, 0};
    os << k[0] << "," << k[1] << "," << xi[0] << "," << xi[1] << "," << p.z.real() << ","
       << p.z.imag() << "," << p.err_budget << "\n";
  }
  return os.str();
}

}  // namespace speclab::quantization
