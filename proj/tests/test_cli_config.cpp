#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "speclab/config.hpp"

using namespace speclab;
using namespace speclab::config;

namespace {

const char* kFullConfig = R"({
  "operator": {
    "caps": {"k_max": 6, "n_xi": 6, "m_eps": 6},
    "terms": [
      {"k": [0,0], "alpha": [1,0], "m": 0, "re": 1.0, "im": 0.0},
      {"k": [0,0], "alpha": [0,1], "m": 0, "re": 1.6180339887498949, "im": 0.0},
      {"k": [1,0], "alpha": [0,0], "m": 1, "re": 0.0, "im": 0.5},
      {"k": [-1,0], "alpha": [0,0], "m": 1, "re": 0.0, "im": 0.5}
    ]
  },
  "frequency": {"a": [1.0, 1.6180339887498949], "C0": 2.0, "N0": 2.0, "k_cap": 30},
  "quantization": {"S": [0,0], "k0": [0,0], "h": 0.0078125, "eps": 0.05, "window": 0.15},
  "normal_form": {"N": 3},
  "oracle": {"R": 0.2, "rect": {"re_halfwidth": 0.03, "im_center": 0.0, "im_halfwidth": 0.0025}},
  "compare": {"budget_factor": 10.0},
  "outputs": {"dir": "out", "formats": ["csv","json"]},
  "seed": 7
})";

}  // namespace

TEST_CASE("full config parses into domain objects") {
  auto cfg = ExperimentConfig::from_json_text(kFullConfig);
  REQUIRE(cfg.op.has_value());
  CHECK(cfg.op->h_terms.size() == 1);
  REQUIRE(cfg.frequency.has_value());
  CHECK(cfg.frequency->k_cap == 30);
  auto fv = cfg.frequency->certified();
  CHECK(fv.certified_cap == 30);
  REQUIRE(cfg.quant.has_value());
  CHECK(cfg.quant->h == doctest::Approx(0.0078125));
  CHECK(cfg.normal_form_N == 3);
  REQUIRE(cfg.rect.has_value());
  CHECK(cfg.rect->re_halfwidth == doctest::Approx(0.03));
  CHECK(cfg.compare.budget_factor == doctest::Approx(10.0));
  CHECK(cfg.seed == 7);
}

TEST_CASE("missing blocks are reported through need()") {
  auto cfg = ExperimentConfig::from_json_text("{}");
  CHECK_FALSE(cfg.op.has_value());
  CHECK_THROWS_AS(need(cfg.frequency, "frequency"), validation_error);
}

TEST_CASE("malformed JSON and bad values raise validation errors") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{"), validation_error);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"quantization": {"h": -1.0}})"),
                  std::exception);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(
          R"({"oracle": {"rect": {"re_halfwidth": -2.0, "im_halfwidth": 1.0}}})"),
      std::exception);
}

TEST_CASE("T sweep values are log spaced") {
  SweepBlock s;
  s.from = 10;
  s.to = 1000;
  s.count = 3;
  auto v = s.values();
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(10.0));
  CHECK(v[1] == doctest::Approx(100.0));
  CHECK(v[2] == doctest::Approx(1000.0));
}

TEST_CASE("kernel block factory validates its type") {
  KernelBlock kb;
  kb.type = "bump";
  CHECK(std::abs(kb.make().hat(0.0) - 1.0) < 1e-12);
  kb.type = "box";
  CHECK(std::abs(kb.make().hat_complex(0.0).real() - 1.0) < 1e-12);
  kb.type = "triangle";
  CHECK_THROWS_AS(kb.make(), validation_error);
}
