#pragma once

// Bohr-Sommerfeld quasi-eigenvalue lattices from normal forms, rectangle
// windows, and the rescaled large-eps variant.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "speclab/birkhoff.hpp"
#include "speclab/symbol.hpp"

namespace speclab::quantization {

using birkhoff::NormalFormResult;
using num::Cplx;
using num::CVec2;
using num::Vec2;
using num::Vec2i;

struct QuantizationData {
  Vec2 S{0.0, 0.0};      // actions of the fundamental cycles
  Vec2i k0{0, 0};        // Maslov indices (torus-model default (0,0))
  double h = 0.1;
  double eps = 0.0;
  double window_radius = 1.0;  // cap on |xi_k|

  void validate() const {
    if (!(h > 0)) throw std::invalid_argument("QuantizationData: h must be positive");
    if (!(window_radius > 0)) throw std::invalid_argument("QuantizationData: window_radius must be positive");
    if (eps < 0) throw std::invalid_argument("QuantizationData: eps must be nonnegative");
  }
  Vec2 xi_of(const Vec2i& k) const {
    return Vec2{h * (k[0] - k0[0] / 4.0) - S[0] / (2 * M_PI),
                h * (k[1] - k0[1] / 4.0) - S[1] / (2 * M_PI)};
  }
};

struct Rectangle {
  double re_center = 0, re_halfwidth = 1, im_center = 0, im_halfwidth = 1;
  bool contains(Cplx z) const {
    return std::abs(z.real() - re_center) <= re_halfwidth &&
           std::abs(z.imag() - im_center) <= im_halfwidth;
  }
  void validate() const {
    if (!(re_halfwidth > 0 && im_halfwidth > 0))
      throw std::invalid_argument("Rectangle: halfwidths must be positive");
  }
};

enum class CloudSource { lattice, oracle };

struct SpectralPoint {
  Cplx z;
  std::optional<Vec2i> label;  // lattice index k when source == lattice
  CloudSource source = CloudSource::lattice;
  double err_budget = 0.0;     // per-point error-budget annotation (lattice side)
};

struct SpectralCloud {
  std::vector<SpectralPoint> points;
};

struct LatticePoint {
  Vec2i k;
  Vec2 xi;
};

/// All k with |xi_k| <= window_radius, xi_k = h(k - k0/4) - S/2pi.
/// Throws when more than `point_cap` points would be produced.
std::vector<LatticePoint> lattice_points(const QuantizationData& qd,
                                         std::size_t point_cap = 1000000);

/// z(k) = sum_n h^n p_normal[n](xi_k, eps), filtered to the rectangle.
/// err_budget = remainder_norm * max(|xi_k|, eps, h)^{N+1}.
SpectralCloud quasi_eigenvalues(const NormalFormResult& nf, const QuantizationData& qd,
                                const Rectangle& rect);

/// Terms p~_n(eta, eps_tilde) of an eps_tilde-rescaled normal form, carrying the
/// scaling law mu^{1-n} p~_n(eta/mu, mu eps_tilde) = p~_n(eta, eps_tilde).
struct RescaledTermSet {
  double eps_tilde = 1.0;
  std::vector<std::function<Cplx(CVec2, double)>> terms;  // terms[n](eta, eps_tilde)
};

/// Builds the rescaled terms p~_n(eta, eps_tilde) = eps_tilde^{n-1} s_n(eps_tilde eta)
/// from a normal form at perturbation strength eps.
RescaledTermSet make_rescaled_terms(const NormalFormResult& nf, double eps, double eps_tilde);

class homogeneity_error : public std::runtime_error {
 public:
  explicit homogeneity_error(const std::string& what) : std::runtime_error(what) {}
};

/// z(k) = sum_{n<=N1} h^n p~_n(xi_k, 1, eps) evaluated through the scaling law;
/// the homogeneity identity is verified at two mu values (1e-10) before
/// summation. When `term_magnitudes` is given it receives, per n, the max of
/// |p~_n(xi_k, 1, eps)| over the lattice window (the growth bookkeeping for
/// the eps^{-2(n-1)+} eps_tilde^{-n} bound).
SpectralCloud rescaled_quasi_eigenvalues(const RescaledTermSet& terms, const QuantizationData& qd,
                                         int N1, const Rectangle& rect,
                                         std::vector<double>* term_magnitudes = nullptr);

/// CSV emission: header k1,k2,xi1,xi2,re_z,im_z,err_budget.
std::string cloud_to_csv(const SpectralCloud& cloud, const QuantizationData& qd);

}  // namespace speclab::quantization
