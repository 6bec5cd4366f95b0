#pragma once

// Ground-truth spectra: assemble the Weyl-quantized operator matrix in the
// Floquet Fourier basis, diagonalize it densely, and match eigenvalue clouds
// against lattice predictions.

#include <map>
#include <string>
#include <vector>

#include "speclab/quantization.hpp"
#include "speclab/symbol.hpp"

namespace speclab::oracle {

using num::Cplx;
using num::Vec2;
using num::Vec2i;
using quantization::QuantizationData;
using quantization::Rectangle;
using quantization::SpectralCloud;
using symbols::OperatorSymbol;

struct OperatorMatrix {
  std::vector<Vec2i> basis;       // lattice indices l with |xi_l| <= R
  std::vector<Cplx> dense;        // row-major n x n
  double h = 0, eps = 0, R = 0;
  int symbol_mode_width = 0;      // max ||k||_inf over the symbol's Fourier modes
  std::size_t dropped_couplings = 0;  // boundary modes whose target left the basis
  QuantizationData qd;

  std::size_t size() const { return basis.size(); }
  Cplx& at(std::size_t row, std::size_t col) { return dense[row * basis.size() + col]; }
  const Cplx& at(std::size_t row, std::size_t col) const { return dense[row * basis.size() + col]; }
};

/// Weyl midpoint rule on the Floquet basis: a symbol term c e^{ik.x} xi^alpha eps^m
/// in h-term n adds h^n eps^m c (xi_l + h k/2)^alpha to entry (l+k, l).
OperatorMatrix build_matrix(const OperatorSymbol& P, const QuantizationData& qd, double R,
                            std::size_t basis_cap = 4000);

class eigensolver_error : public std::runtime_error {
 public:
  explicit eigensolver_error(const std::string& what) : std::runtime_error(what) {}
};

struct EigenvalueReport {
  SpectralCloud cloud;          // eigenvalues inside the rectangle
  std::size_t n_total = 0;      // full matrix dimension
  double interior_margin = 0;   // distance of rect from the truncation-shell values
  std::vector<Cplx> all;        // all eigenvalues, unfiltered
};

/// Dense non-Hermitian eigendecomposition (LAPACK zgeev), filtered to rect.
/// Enforces that the rectangle stays >= 5 symbol-mode-widths * h away from the
/// |xi| = R truncation shell in the xi-window sense.
EigenvalueReport eigenvalues(const OperatorMatrix& M, const Rectangle& rect);

struct MatchPair {
  Vec2i lattice_label{0, 0};
  Cplx predicted;
  Cplx eigenvalue;
  double distance = 0;  // plain |z_pred - z_orac|
};

struct MatchReport {
  std::vector<MatchPair> pairs;
  std::size_t unmatched_lattice = 0;
  std::size_t unmatched_oracle = 0;
  double max_error = 0;
  double mean_error = 0;

  std::string to_json() const;
  std::string to_csv() const;
};

/// Optimal bipartite assignment minimizing total distance for <= `exact_cap`
/// points per side (Hungarian), greedy nearest-neighbor with swap refinement
/// above. Pairing uses the anisotropic metric with Im rescaled by 1/eps;
/// reported distances are plain Euclidean.
MatchReport match_clouds(const SpectralCloud& predicted, const SpectralCloud& computed,
                         const Rectangle& rect, double eps_im_scale = 0.0,
                         std::size_t exact_cap = 500);

/// Binary dump of the dense matrix (row-major complex doubles) + JSON sidecar.
void dump_matrix(const OperatorMatrix& M, const std::string& bin_path,
                 const std::string& json_path);

}  // namespace speclab::oracle
