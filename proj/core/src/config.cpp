#include "speclab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace speclab::config {

using nlohmann::json;

symbols::FrequencyVector FrequencyBlock::certified() const {
  return averaging::certify(a, C0, N0, k_cap);
}

averaging::SmoothingKernel KernelBlock::make() const {
  if (type == "bump") return averaging::SmoothingKernel::bump(halfwidth, sharpness);
  if (type == "box") return averaging::SmoothingKernel::box();
  throw validation_error("kernel type must be 'bump' or 'box', got '" + type + "'");
}

std::vector<double> SweepBlock::values() const {
  std::vector<double> v;
  if (count < 2 || !(from > 0) || !(to > from))
    throw validation_error("T_sweep requires 0 < from < to and count >= 2");
  for (int i = 0; i < count; ++i)
    v.push_back(from * std::pow(to / from, double(i) / (count - 1)));
  return v;
}

namespace {

Vec2 parse_vec2(const json& j) { return Vec2{j.at(0).get<double>(), j.at(1).get<double>()}; }
Vec2i parse_vec2i(const json& j) { return Vec2i{j.at(0).get<int>(), j.at(1).get<int>()}; }

symbols::ClassicalSymbol parse_symbol(const json& j) {
  return symbols::ClassicalSymbol::from_json(j.dump());
}

symbols::OperatorSymbol parse_operator(const json& j) {
  if (j.contains("h_terms")) return symbols::OperatorSymbol::from_json(j.dump());
  return symbols::OperatorSymbol(parse_symbol(j));
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw validation_error(std::string("config JSON parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("operator")) cfg.op = parse_operator(j["operator"]);
    if (j.contains("frequency")) {
      FrequencyBlock f;
      f.a = parse_vec2(j["frequency"].at("a"));
      f.C0 = j["frequency"].at("C0").get<double>();
      f.N0 = j["frequency"].at("N0").get<double>();
      f.k_cap = j["frequency"].value("k_cap", 30);
      cfg.frequency = f;
    }
    if (j.contains("quantization")) {
      const auto& q = j["quantization"];
      quantization::QuantizationData qd;
      if (q.contains("S")) qd.S = parse_vec2(q["S"]);
      if (q.contains("k0")) qd.k0 = parse_vec2i(q["k0"]);
      qd.h = q.at("h").get<double>();
      qd.eps = q.value("eps", 0.0);
      qd.window_radius = q.value("window", 1.0);
      qd.validate();
      cfg.quant = qd;
    }
    if (j.contains("normal_form")) cfg.normal_form_N = j["normal_form"].value("N", 3);
    if (j.contains("oracle")) {
      cfg.oracle_R = j["oracle"].value("R", 0.0);
      if (j["oracle"].contains("rect")) {
        const auto& r = j["oracle"]["rect"];
        quantization::Rectangle rect;
        rect.re_center = r.value("re_center", 0.0);
        rect.re_halfwidth = r.at("re_halfwidth").get<double>();
        rect.im_center = r.value("im_center", 0.0);
        rect.im_halfwidth = r.at("im_halfwidth").get<double>();
        rect.validate();
        cfg.rect = rect;
      }
    }
    if (j.contains("compare")) {
      cfg.compare.budget_factor = j["compare"].value("budget_factor", 10.0);
      cfg.compare.abs_floor = j["compare"].value("abs_floor", 1e-12);
    }
    if (j.contains("average")) {
      const auto& a = j["average"];
      AverageBlock blk;
      if (a.contains("q")) blk.q = parse_symbol(a["q"]);
      if (a.contains("p_N")) blk.p_N = parse_symbol(a["p_N"]);
      if (a.contains("kernel")) {
        blk.kernel.type = a["kernel"].value("type", "bump");
        blk.kernel.halfwidth = a["kernel"].value("halfwidth", 1.0);
        blk.kernel.sharpness = a["kernel"].value("sharpness", 1.0);
      }
      if (a.contains("T_sweep")) {
        SweepBlock s;
        s.from = a["T_sweep"].value("from", 10.0);
        s.to = a["T_sweep"].value("to", 100.0);
        s.count = a["T_sweep"].value("count", 9);
        blk.T_sweep = s;
      }
      if (a.contains("family")) {
        const auto& f = a["family"];
        FamilyBlock fam{parse_symbol(f.at("q")), std::nullopt, f.value("mu_from", 0.0),
                        f.value("mu_to", 1.0), f.value("count", 11)};
        if (f.contains("b") && !f["b"].is_null()) fam.b = parse_vec2i(f["b"]);
        blk.family = fam;
      }
      cfg.average = blk;
    }
    if (j.contains("surfrev")) {
      const auto& s = j["surfrev"];
      SurfrevBlock blk;
      blk.profile_json = s.at("profile").dump();
      blk.q0_kind = s.value("q0", "fprime_squared");
      blk.q1_kind = s.value("q1", "cos_theta");
      blk.eta = s.value("eta", 0.0);
      blk.alpha = s.value("alpha", 0.02);
      blk.d = s.value("d", 1.0);
      blk.a_grid = s.value("a_grid", 2000);
      blk.probe_neighborhood = s.value("probe_neighborhood", 0.05);
      if (s.contains("probes")) blk.probes = s["probes"].get<std::vector<double>>();
      cfg.surfrev = blk;
    }
    if (j.contains("hj")) {
      const auto& h = j["hj"];
      HjBlock blk{parse_symbol(h.at("p_full")),
                  parse_symbol(h.at("p_poly")),
                  parse_vec2(h.at("xi")),
                  h.value("eps", 0.1),
                  h.value("eps_tilde", 0.2),
                  h.value("tol", 1e-12),
                  h.value("max_iter", 60),
                  h.value("smallness_threshold", 0.1)};
      cfg.hj = blk;
    }
    if (j.contains("barrier_top")) {
      const auto& b = j["barrier_top"];
      BarrierTopBlock blk;
      blk.lambda = parse_vec2(b.at("lambda"));
      const auto& q = b.at("quartic");
      blk.quartic.v40 = q.value("v40", 0.0);
      blk.quartic.v31 = q.value("v31", 0.0);
      blk.quartic.v22 = q.value("v22", 0.0);
      blk.quartic.v13 = q.value("v13", 0.0);
      blk.quartic.v04 = q.value("v04", 0.0);
      if (b.contains("actions")) blk.actions = parse_vec2(b["actions"]);
      blk.T = b.value("T", 1e4);
      cfg.barrier_top = blk;
    }
    if (j.contains("outputs")) {
      cfg.out_dir = j["outputs"].value("dir", "out");
      if (j["outputs"].contains("formats"))
        cfg.formats = j["outputs"]["formats"].get<std::vector<std::string>>();
    }
    cfg.seed = j.value("seed", 0ull);
  } catch (const validation_error&) {
    throw;
  } catch (const std::exception& e) {
    throw validation_error(std::string("config validation error: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace speclab::config
