#include "speclab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "speclab/numerics.hpp"

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, std::complex<double>* a,
            const int* lda, std::complex<double>* w, std::complex<double>* vl, const int* ldvl,
            std::complex<double>* vr, const int* ldvr, std::complex<double>* work,
            const int* lwork, double* rwork, int* info);
}

namespace speclab::oracle {

namespace {

double rect_distance(Cplx z, const Rectangle& rect) {
  double dx = std::max(0.0, std::abs(z.real() - rect.re_center) - rect.re_halfwidth);
  double dy = std::max(0.0, std::abs(z.imag() - rect.im_center) - rect.im_halfwidth);
  return std::hypot(dx, dy);
}

}  // namespace

OperatorMatrix build_matrix(const OperatorSymbol& P, const QuantizationData& qd, double R,
                            std::size_t basis_cap) {
  P.validate();
  if (!(R > 0)) throw std::invalid_argument("build_matrix: R must be positive");
  QuantizationData basis_qd = qd;
  basis_qd.window_radius = R;
  auto pts = quantization::lattice_points(basis_qd, basis_cap);

  OperatorMatrix M;
  M.h = qd.h;
  M.eps = qd.eps;
  M.R = R;
  M.qd = qd;
  M.basis.reserve(pts.size());
  for (const auto& p : pts) M.basis.push_back(p.k);
  std::map<Vec2i, std::size_t> index;
  for (std::size_t i = 0; i < M.basis.size(); ++i) index[M.basis[i]] = i;

  int width = 0;
  for (const auto& t : P.h_terms)
    for (const auto& [key, c] : t.terms()) width = std::max(width, num::norm_inf(key.k));
  M.symbol_mode_width = width;

  const std::size_t n = M.basis.size();
  M.dense.assign(n * n, Cplx(0.0));
  std::vector<std::size_t> dropped(n, 0);

  num::parallel_for(n, [&](std::size_t col) {
    const Vec2i l = M.basis[col];
    const Vec2 xi_l = qd.xi_of(l);
    double hn = 1.0;
    for (std::size_t nh = 0; nh < P.h_terms.size(); ++nh) {
      for (const auto& [key, c] : P.h_terms[nh].terms()) {
        Vec2i target{l[0] + key.k[0], l[1] + key.k[1]};
        auto it = index.find(target);
        if (it == index.end()) {
          if (key.k[0] != 0 || key.k[1] != 0) dropped[col] += 1;
          continue;
        }
        // Weyl midpoint rule: xi-monomials evaluated at xi_l + h k / 2.
        Cplx val = c * hn;
        const double mid0 = xi_l[0] + qd.h * key.k[0] * 0.5;
        const double mid1 = xi_l[1] + qd.h * key.k[1] * 0.5;
        for (int r = 0; r < key.alpha[0]; ++r) val *= mid0;
        for (int r = 0; r < key.alpha[1]; ++r) val *= mid1;
        for (int r = 0; r < key.m; ++r) val *= qd.eps;
        M.dense[it->second * n + col] += val;
      }
      hn *= qd.h;
    }
  });
  for (std::size_t d : dropped) M.dropped_couplings += d;
  return M;
}

EigenvalueReport eigenvalues(const OperatorMatrix& M, const Rectangle& rect) {
  rect.validate();
  const int n = (int)M.size();
  if (n == 0) throw std::invalid_argument("eigenvalues: empty matrix");

  // The comparison window must sit clear of the truncation shell.
  const double shell_guard = 5.0 * std::max(1, M.symbol_mode_width) * M.h;
  if (M.qd.window_radius > M.R - shell_guard)
    throw std::invalid_argument(
        "eigenvalues: window radius " + std::to_string(M.qd.window_radius) +
        " too close to the truncation shell R = " + std::to_string(M.R) +
        " (need clearance " + std::to_string(shell_guard) + ")");

  std::vector<Cplx> A = M.dense;  // zgeev overwrites
  std::vector<Cplx> w(n), work(1);
  std::vector<double> rwork(2 * n);
  int info = 0, lwork = -1, lda = n;
  zgeev_("N", "N", &n, A.data(), &lda, w.data(), nullptr, &lda, nullptr, &lda, work.data(), &lwork,
         rwork.data(), &info);
  if (info != 0)
    throw eigensolver_error("zgeev workspace query failed, info = " + std::to_string(info));
  lwork = (int)work[0].real();
  work.resize(std::max(lwork, 1));
  zgeev_("N", "N", &n, A.data(), &lda, w.data(), nullptr, &lda, nullptr, &lda, work.data(), &lwork,
         rwork.data(), &info);
  if (info != 0)
    throw eigensolver_error("zgeev failed to converge, info = " + std::to_string(info));

  EigenvalueReport rep;
  rep.n_total = M.size();
  rep.all = w;

  // Interior-safety margin: distance of the rectangle from the diagonal values
  // on the truncation shell |xi_l| > R - guard. Zero margin flags possible
  // contamination of the window by boundary-truncated spectrum.
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < M.size(); ++j) {
    Vec2 xi = M.qd.xi_of(M.basis[j]);
    if (num::norm2(xi) <= M.R - shell_guard) continue;
    margin = std::min(margin, rect_distance(M.at(j, j), rect));
  }
  rep.interior_margin = margin;

  for (const auto& z : w) {
    if (!rect.contains(z)) continue;
    quantization::SpectralPoint sp;
    sp.z = z;
    sp.source = quantization::CloudSource::oracle;
    rep.cloud.points.push_back(sp);
  }
  std::sort(rep.cloud.points.begin(), rep.cloud.points.end(),
            [](const quantization::SpectralPoint& a, const quantization::SpectralPoint& b) {
              return std::pair(a.z.real(), a.z.imag()) < std::pair(b.z.real(), b.z.imag());
            });
  return rep;
}

MatchReport match_clouds(const SpectralCloud& predicted, const SpectralCloud& computed,
                         const Rectangle& rect, double eps_im_scale, std::size_t exact_cap) {
  std::vector<quantization::SpectralPoint> pred, comp;
  for (const auto& p : predicted.points)
    if (rect.contains(p.z)) pred.push_back(p);
  for (const auto& p : computed.points)
    if (rect.contains(p.z)) comp.push_back(p);

  const double im_w = eps_im_scale > 0 ? 1.0 / eps_im_scale : 1.0;
  auto metric = [im_w](Cplx a, Cplx b) {
    double dre = a.real() - b.real();
    double dim = (a.imag() - b.imag()) * im_w;
    return std::hypot(dre, dim);
  };

  MatchReport rep;
  const std::size_t np = pred.size(), nc = comp.size();
  std::vector<int> assign(np, -1);
  if (np == 0 || nc == 0) {
    rep.unmatched_lattice = np;
    rep.unmatched_oracle = nc;
    return rep;
  }

  if (np <= exact_cap && nc <= exact_cap) {
    std::vector<std::vector<double>> cost(np, std::vector<double>(nc));
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < nc; ++j) cost[i][j] = metric(pred[i].z, comp[j].z);
    assign = num::min_cost_assignment(cost);
  } else {
    // Greedy nearest neighbor, then 2-swap refinement.
    std::vector<char> used(nc, 0);
    for (std::size_t i = 0; i < np; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int bj = -1;
      for (std::size_t j = 0; j < nc; ++j) {
        if (used[j]) continue;
        double d = metric(pred[i].z, comp[j].z);
        if (d < best) {
          best = d;
          bj = (int)j;
        }
      }
      if (bj >= 0) {
        assign[i] = bj;
        used[bj] = 1;
      }
    }
    bool improved = true;
    int rounds = 0;
    while (improved && rounds++ < 50) {
      improved = false;
      for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = i + 1; j < np; ++j) {
          if (assign[i] < 0 || assign[j] < 0) continue;
          double cur = metric(pred[i].z, comp[assign[i]].z) + metric(pred[j].z, comp[assign[j]].z);
          double swp = metric(pred[i].z, comp[assign[j]].z) + metric(pred[j].z, comp[assign[i]].z);
          if (swp < cur - 1e-15) {
            std::swap(assign[i], assign[j]);
            improved = true;
          }
        }
      }
    }
  }

  std::vector<char> used(nc, 0);
  double total = 0;
  for (std::size_t i = 0; i < np; ++i) {
    if (assign[i] < 0) {
      rep.unmatched_lattice += 1;
      continue;
    }
    used[assign[i]] = 1;
    MatchPair mp;
    mp.lattice_label = pred[i].label.value_or(Vec2i{0, 0});
    mp.predicted = pred[i].z;
    mp.eigenvalue = comp[assign[i]].z;
    mp.distance = std::abs(mp.predicted - mp.eigenvalue);
    rep.max_error = std::max(rep.max_error, mp.distance);
    total += mp.distance;
    rep.pairs.push_back(mp);
  }
  for (std::size_t j = 0; j < nc; ++j)
    if (!used[j]) rep.unmatched_oracle += 1;
  rep.mean_error = rep.pairs.empty() ? 0.0 : total / rep.pairs.size();
  return rep;
}

std::string MatchReport::to_json() const {
  nlohmann::json j;
  j["max_error"] = max_error;
  j["mean_error"] = mean_error;
  j["unmatched_lattice"] = unmatched_lattice;
  j["unmatched_oracle"] = unmatched_oracle;
  j["n_pairs"] = pairs.size();
  return j.dump(2);
}

std::string MatchReport::to_csv() const {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(15);
  os << "k1,k2,re_pred,im_pred,re_eig,im_eig,distance\n";
  for (const auto& p : pairs)
    os << p.lattice_label[0] << "," << p.lattice_label[1] << "," << p.predicted.real() << ","
       << p.predicted.imag() << "," << p.eigenvalue.real() << "," << p.eigenvalue.imag() << ","
       << p.distance << "\n";
  return os.str();
}

void dump_matrix(const OperatorMatrix& M, const std::string& bin_path,
                 const std::string& json_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("dump_matrix: cannot open " + bin_path);
  bin.write(reinterpret_cast<const char*>(M.dense.data()),
            (std::streamsize)(M.dense.size() * sizeof(Cplx)));
  nlohmann::json j;
  j["shape"] = {M.size(), M.size()};
  j["layout"] = "row-major complex128 (re,im interleaved)";
  j["h"] = M.h;
  j["eps"] = M.eps;
  j["R"] = M.R;
  j["dropped_couplings"] = M.dropped_couplings;
  auto basis = nlohmann::json::array();
  for (const auto& l : M.basis) basis.push_back({l[0], l[1]});
  j["basis"] = std::move(basis);
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("dump_matrix: cannot open " + json_path);
  js << j.dump(2) << "\n";
}

}  // namespace speclab::oracle
