// speclab: Birkhoff normal forms, Bohr-Sommerfeld lattices, flow averages and
// dense Floquet-matrix ground truth on T*T^2, driven by JSON experiment configs.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "speclab/birkhoff.hpp"
#include "speclab/config.hpp"
#include "speclab/hamilton_jacobi.hpp"
#include "speclab/numerics.hpp"
#include "speclab/oracle.hpp"
#include "speclab/quantization.hpp"
#include "speclab/surfrev.hpp"

namespace fs = std::filesystem;
using namespace speclab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAssert = 4;

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
}

std::string csv_header_line(std::initializer_list<const char*> cols) {
  std::string s;
  for (const char* c : cols) {
    if (!s.empty()) s += ",";
    s += c;
  }
  return s + "\n";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15e", v);
  return buf;
}

birkhoff::NormalFormResult run_pipeline(const config::ExperimentConfig& cfg) {
  const auto& op = config::need(cfg.op, "operator");
  const auto& freq = config::need(cfg.frequency, "frequency");
  return birkhoff::full_normal_form_pipeline(op, freq.certified(), cfg.normal_form_N);
}

int cmd_normal_form(const config::ExperimentConfig& cfg, const fs::path& out) {
  auto nf = run_pipeline(cfg);
  write_file(out, "normal_form.json", nf.to_json());
  std::cout << "normal-form: N = " << nf.order_N << ", remainder_norm = " << nf.remainder_norm
            << "\n";
  return kExitOk;
}

int cmd_quantize(const config::ExperimentConfig& cfg, const fs::path& out) {
  auto nf = run_pipeline(cfg);
  auto qd = config::need(cfg.quant, "quantization");
  quantization::Rectangle rect = cfg.rect.value_or(
      quantization::Rectangle{0, 1e30, 0, 1e30});
  auto cloud = quantization::quasi_eigenvalues(nf, qd, rect);
  write_file(out, "lattice.csv", quantization::cloud_to_csv(cloud, qd));
  std::cout << "quantize: " << cloud.points.size() << " lattice points\n";
  return kExitOk;
}

int cmd_oracle(const config::ExperimentConfig& cfg, const fs::path& out, bool dump) {
  const auto& op = config::need(cfg.op, "operator");
  auto qd = config::need(cfg.quant, "quantization");
  double R = config::need(cfg.oracle_R, "oracle.R");
  auto rect = config::need(cfg.rect, "oracle.rect");
  auto M = oracle::build_matrix(op, qd, R);
  if (dump)
    oracle::dump_matrix(M, (out / "matrix.bin").string(), (out / "matrix.json").string());
  auto eig = oracle::eigenvalues(M, rect);
  std::string csv = csv_header_line({"re_z", "im_z"});
  for (const auto& p : eig.cloud.points) csv += fmt(p.z.real()) + "," + fmt(p.z.imag()) + "\n";
  write_file(out, "oracle.csv", csv);
  std::cout << "oracle: matrix " << M.size() << "^2, " << eig.cloud.points.size()
            << " eigenvalues in rect, interior margin " << eig.interior_margin << "\n";
  return kExitOk;
}

int cmd_compare(const config::ExperimentConfig& cfg, const fs::path& out, bool assert_mode) {
  const auto& op = config::need(cfg.op, "operator");
  auto qd = config::need(cfg.quant, "quantization");
  double R = config::need(cfg.oracle_R, "oracle.R");
  auto rect = config::need(cfg.rect, "oracle.rect");

  auto nf = run_pipeline(cfg);
  auto predicted = quantization::quasi_eigenvalues(nf, qd, rect);
  auto M = oracle::build_matrix(op, qd, R);
  auto eig = oracle::eigenvalues(M, rect);
  auto report = oracle::match_clouds(predicted, eig.cloud, rect, qd.eps);

  write_file(out, "compare.json", report.to_json());
  write_file(out, "compare.csv", report.to_csv());
  std::cout << "compare: " << report.pairs.size() << " pairs, max_error = " << report.max_error
            << ", unmatched lattice/oracle = " << report.unmatched_lattice << "/"
            << report.unmatched_oracle << "\n";

  if (assert_mode) {
    if (report.unmatched_lattice != 0 || report.unmatched_oracle != 0) {
      std::cerr << "assert: point counts differ inside the rectangle\n";
      return kExitAssert;
    }
    // Per-point error budgets from the lattice side.
    std::map<std::pair<int, int>, double> budget;
    for (const auto& p : predicted.points)
      if (p.label) budget[{(*p.label)[0], (*p.label)[1]}] = p.err_budget;
    for (const auto& pr : report.pairs) {
      double allowed = cfg.compare.budget_factor *
                       std::max(budget[{pr.lattice_label[0], pr.lattice_label[1]}],
                                cfg.compare.abs_floor);
      if (pr.distance > allowed) {
        std::cerr << "assert: pair at k = (" << pr.lattice_label[0] << "," << pr.lattice_label[1]
                  << ") error " << pr.distance << " > allowed " << allowed << "\n";
        return kExitAssert;
      }
    }
  }
  return kExitOk;
}

int cmd_average(const config::ExperimentConfig& cfg, const fs::path& out) {
  const auto& blk = config::need(cfg.average, "average");
  auto kernel = blk.kernel.make();
  nlohmann::json summary;

  if (blk.T_sweep) {
    const auto& q = config::need(blk.q, "average.q");
    const auto& pN = config::need(blk.p_N, "average.p_N");
    auto Ts = blk.T_sweep->values();
    std::string csv = csv_header_line({"T", "sup_diff"});
    std::vector<double> lx, ly;
    auto q0 = q.torus_average();
    for (double T : Ts) {
      auto avg = averaging::flow_average(q, pN, T, kernel);
      auto diff = avg - q0;
      // sup over x of |diff| bounded by the coefficient l1-norm; use a grid sup.
      double sup = 0;
      const int ng = 64;
      for (int i = 0; i < ng; ++i)
        for (int j = 0; j < ng; ++j) {
          num::Vec2 x{2 * M_PI * i / ng, 2 * M_PI * j / ng};
          sup = std::max(sup, std::abs(diff.evaluate(x, num::Vec2{0, 0}, 1.0)));
        }
      csv += fmt(T) + "," + fmt(sup) + "\n";
      if (sup > 0) {
        lx.push_back(std::log(T));
        ly.push_back(std::log(sup));
      }
    }
    write_file(out, "decay.csv", csv);
    if (lx.size() >= 2) summary["decay_exponent"] = -num::ls_slope(lx, ly);
  }

  if (blk.family) {
    const auto& fam = *blk.family;
    std::string csv = csv_header_line({"mu", "q_inf_lo", "q_inf_hi"});
    for (int i = 0; i < fam.count; ++i) {
      double mu = fam.mu_from + (fam.mu_to - fam.mu_from) *
                                    (fam.count == 1 ? 0.0 : double(i) / (fam.count - 1));
      // eps-powers carry the mu dependence: substitute eps = mu.
      symbols::ClassicalSymbol qmu(fam.q.caps());
      for (const auto& [key, c] : fam.q.terms()) {
        symbols::SymbolKey flat{key.k, key.alpha, 0};
        qmu.accumulate(flat, c * std::pow(mu, key.m));
      }
      averaging::IntervalSet iv;
      if (fam.b)
        iv = averaging::q_infinity_range(qmu, *fam.b);
      else {
        double v = qmu.torus_average().evaluate(num::Vec2{0, 0}, num::Vec2{0, 0}, 0.0).real();
        iv.add(v, v);
      }
      csv += fmt(mu) + "," + fmt(iv.lo()) + "," + fmt(iv.hi()) + "\n";
    }
    write_file(out, "q_infinity.csv", csv);
  }

  write_file(out, "average.json", summary.dump(2));
  std::cout << "average: done\n";
  return kExitOk;
}

int cmd_surfrev(const config::ExperimentConfig& cfg, const fs::path& out) {
  const auto& blk = config::need(cfg.surfrev, "surfrev");
  auto sp = surfrev::profile_from_json(blk.profile_json);

  std::function<double(double)> q0;
  if (blk.q0_kind == "fprime_squared")
    q0 = [sp](double s) { return sp.df(s) * sp.df(s); };
  else if (blk.q0_kind == "profile")
    q0 = [sp](double s) { return sp.f(s); };
  else
    throw config::validation_error("surfrev.q0 must be 'fprime_squared' or 'profile'");

  std::function<double(double, double)> q1;
  if (blk.q1_kind == "cos_theta")
    q1 = [](double, double th) { return std::cos(th); };
  else if (blk.q1_kind == "none")
    q1 = [](double, double) { return 0.0; };
  else
    throw config::validation_error("surfrev.q1 must be 'cos_theta' or 'none'");

  auto rep = surfrev::good_set(sp, q0, q1, blk.eta, blk.alpha, blk.d, blk.a_grid, blk.probes,
                               blk.probe_neighborhood);
  write_file(out, "surfrev.csv", rep.to_csv());
  write_file(out, "good_set.json", rep.to_json());
  std::cout << "surfrev: excluded measure " << rep.excluded_measure << ", good intervals "
            << rep.good_intervals.intervals.size() << "\n";
  return kExitOk;
}

int cmd_hj_solve(const config::ExperimentConfig& cfg, const fs::path& out) {
  const auto& blk = config::need(cfg.hj, "hj");
  auto sol = hamjac::hj_solve(blk.p_full, blk.p_poly, blk.xi, blk.eps, blk.eps_tilde, blk.tol,
                              blk.max_iter, blk.smallness_threshold);
  write_file(out, "phase.json", sol.to_json());
  std::cout << "hj-solve: residual " << sol.residual << " in " << sol.iterations
            << " iterations\n";
  return kExitOk;
}

int cmd_barrier_top(const config::ExperimentConfig& cfg, const fs::path& out) {
  const auto& blk = config::need(cfg.barrier_top, "barrier_top");
  auto quad = averaging::harmonic_quartic_average(blk.quartic);
  auto crit = averaging::critical_values(blk.lambda, blk.quartic);
  nlohmann::json j;
  j["average"] = {{"I1_sq", quad.c20}, {"I1_I2", quad.c11}, {"I2_sq", quad.c02}};
  j["critical_values"] = crit;
  if (blk.actions) {
    // Long-time average of x1^4 along the harmonic flow, as an independent check.
    const double I1 = (*blk.actions)[0];
    const double T = blk.T, l1 = blk.lambda[0];
    const double amp4 = 4.0 * I1 * I1;  // (2 I1)^2
    auto integrand = [&](double t) {
      double c = std::cos(l1 * t);
      return amp4 * c * c * c * c;
    };
    int panels = (int)std::min(1e6, std::ceil(T * l1 / 3.0));
    double avg = num::integrate_gl(integrand, 0.0, T, panels, 8) / T;
    j["x1_pow4_time_average"] = avg;
    j["x1_pow4_predicted"] = 1.5 * I1 * I1;
  }
  write_file(out, "barrier_top.json", j.dump(2));
  std::cout << "barrier-top: " << crit.size() << " critical values\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral laboratory for weakly non-selfadjoint operators on T*T^2"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  bool assert_mode = false;
  int threads = 0;
  bool dump_matrix = false;

  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* sub_nf = app.add_subcommand("normal-form", "Birkhoff pipeline -> JSON");
  auto* sub_quant = app.add_subcommand("quantize", "quasi-eigenvalue lattice -> CSV");
  auto* sub_oracle = app.add_subcommand("oracle", "matrix + eigenvalues -> CSV");
  sub_oracle->add_flag("--dump-matrix", dump_matrix, "dump the dense matrix + JSON sidecar");
  auto* sub_cmp = app.add_subcommand("compare", "lattice vs oracle MatchReport -> JSON + CSV");
  sub_cmp->add_flag("--assert", assert_mode, "exit 4 when error budgets are exceeded");
  auto* sub_avg = app.add_subcommand("average", "flow/resonant averages, decay fits -> CSV");
  auto* sub_surf = app.add_subcommand("surfrev", "rotation number, averages, good set -> CSV/JSON");
  auto* sub_hj = app.add_subcommand("hj-solve", "Hamilton-Jacobi phase solve -> JSON");
  auto* sub_bt = app.add_subcommand("barrier-top", "quartic averages and critical values -> JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (threads > 0) num::set_default_threads(threads);

  try {
    auto cfg = config::ExperimentConfig::from_file(config_path);
    fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);

    if (sub_nf->parsed()) return cmd_normal_form(cfg, out);
    if (sub_quant->parsed()) return cmd_quantize(cfg, out);
    if (sub_oracle->parsed()) return cmd_oracle(cfg, out, dump_matrix);
    if (sub_cmp->parsed()) return cmd_compare(cfg, out, assert_mode);
    if (sub_avg->parsed()) return cmd_average(cfg, out);
    if (sub_surf->parsed()) return cmd_surfrev(cfg, out);
    if (sub_hj->parsed()) return cmd_hj_solve(cfg, out);
    if (sub_bt->parsed()) return cmd_barrier_top(cfg, out);
    std::cerr << "no subcommand\n";
    return kExitValidation;
  } catch (const config::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const birkhoff::small_divisor_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const oracle::eigensolver_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const hamjac::smallness_violation& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const hamjac::degenerate_frequency& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const quantization::homogeneity_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
