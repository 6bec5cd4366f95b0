#pragma once

// Experiment configuration: one JSON file per experiment, parsed into the
// domain objects consumed by the CLI subcommands.

#include <optional>
#include <string>
#include <vector>

#include "speclab/averaging.hpp"
#include "speclab/oracle.hpp"
#include "speclab/quantization.hpp"
#include "speclab/surfrev.hpp"
#include "speclab/symbol.hpp"

namespace speclab::config {

using num::Vec2;
using num::Vec2i;

struct FrequencyBlock {
  Vec2 a{0, 0};
  double C0 = 1, N0 = 2;
  int k_cap = 30;
  symbols::FrequencyVector certified() const;
};

struct KernelBlock {
  std::string type = "bump";
  double halfwidth = 1.0;
  double sharpness = 1.0;
  averaging::SmoothingKernel make() const;
};

struct SweepBlock {
  double from = 10, to = 100;
  int count = 9;  // log-spaced
  std::vector<double> values() const;
};

struct FamilyBlock {
  symbols::ClassicalSymbol q;         // torus symbol; eps-powers carry the mu-dependence
  std::optional<Vec2i> b;             // rational direction; empty = irrational treatment
  double mu_from = 0, mu_to = 1;
  int count = 2;
};

struct AverageBlock {
  std::optional<symbols::ClassicalSymbol> q;
  std::optional<symbols::ClassicalSymbol> p_N;
  KernelBlock kernel;
  std::optional<SweepBlock> T_sweep;
  std::optional<FamilyBlock> family;
};

struct SurfrevBlock {
  std::string profile_json;  // raw profile JSON, parsed by surfrev::profile_from_json
  std::string q0_kind = "fprime_squared";
  std::string q1_kind = "cos_theta";
  double eta = 0.0;
  double alpha = 0.02;
  double d = 1.0;
  int a_grid = 2000;
  std::vector<double> probes;
  double probe_neighborhood = 0.05;
};

struct HjBlock {
  symbols::ClassicalSymbol p_full;
  symbols::ClassicalSymbol p_poly;
  Vec2 xi{0, 0};
  double eps = 0.1, eps_tilde = 0.2;
  double tol = 1e-12;
  int max_iter = 60;
  double smallness_threshold = 0.1;
};

struct BarrierTopBlock {
  Vec2 lambda{1, 1};
  averaging::QuarticForm quartic;
  std::optional<Vec2> actions;  // (I1, I2) for the time-average check
  double T = 1e4;
};

struct CompareBlock {
  double budget_factor = 10.0;
  double abs_floor = 1e-12;
};

struct ExperimentConfig {
  std::optional<symbols::OperatorSymbol> op;
  std::optional<FrequencyBlock> frequency;
  std::optional<quantization::QuantizationData> quant;
  int normal_form_N = 3;
  std::optional<double> oracle_R;
  std::optional<quantization::Rectangle> rect;
  CompareBlock compare;
  std::optional<AverageBlock> average;
  std::optional<SurfrevBlock> surfrev;
  std::optional<HjBlock> hj;
  std::optional<BarrierTopBlock> barrier_top;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 0;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Require a block to be present for a subcommand.
template <typename T>
const T& need(const std::optional<T>& block, const char* name) {
  if (!block) throw validation_error(std::string("missing config block: ") + name);
  return *block;
}

}  // namespace speclab::config
