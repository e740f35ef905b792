#include "kf/report_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace kf {

using nlohmann::json;

namespace {

json type_to_json(const TypeVerdict& v) {
  return json{{"type", to_string(v.type)},
              {"t", v.t},
              {"m", v.m},
              {"trailing_slope", v.trailing_slope},
              {"early_median", v.early_median},
              {"final_m", v.final_m}};
}

void type_from_json(const json& j, TypeVerdict& v) {
  const std::string t = j.at("type").get<std::string>();
  v.type = t == "I" ? SingularityType::I
                    : (t == "II" ? SingularityType::II : SingularityType::Undetermined);
  v.t = j.at("t").get<std::vector<double>>();
  v.m = j.at("m").get<std::vector<double>>();
  v.trailing_slope = j.at("trailing_slope").get<double>();
  v.early_median = j.at("early_median").get<double>();
  v.final_m = j.at("final_m").get<double>();
}

}  // namespace

std::string report_to_json(const BlowupReport& r) {
  json j;
  j["source"] = r.source;
  j["mode"] = r.mode == VerifyMode::Symplectic ? "symplectic" : "lagrangian";
  j["no_blowup"] = r.no_blowup;
  if (r.no_blowup) j["no_blowup_reason"] = r.no_blowup_reason;
  if (r.has_type) j["type_verdict"] = type_to_json(r.type);

  j["minimality"] = {{"max_mean_curvature", r.max_mean_curvature}, {"minimal", r.minimal}};
  j["angle"] = {{"holomorphicity_gap", r.holomorphicity_gap},
                {"cos_alpha_spread", r.cos_alpha_spread},
                {"cos_alpha_level", r.cos_alpha_level},
                {"jstar_reported", r.jstar_reported},
                {"jstar_angle_error", r.jstar_angle_error},
                {"beta_spread", r.beta_spread}};
  j["curvature"] = {{"min_gauss", r.min_gauss},
                    {"max_gauss", r.max_gauss},
                    {"window_ok", r.curvature_window_ok},
                    {"a2_at_origin", r.a2_at_origin},
                    {"max_a2", r.max_a2},
                    {"nontrivial", r.nontrivial}};
  j["structure_equation"] = {{"l2", r.e1_residual_l2},
                             {"max", r.e1_residual_max},
                             {"vertices", r.e1_vertices}};
  j["quantization"] = {{"n_hat", r.quantization.n_hat},
                       {"nearest_integer_distance", r.quantization.nearest_integer_distance},
                       {"radii", r.quantization.radii},
                       {"c_of_r", r.quantization.c_of_r},
                       {"ok", r.quantization.ok}};
  json comps = json::array();
  for (const auto& c : r.components) {
    comps.push_back({{"faces", c.faces}, {"simplicity_ratio", c.simplicity_ratio}});
  }
  j["components"] = comps;
  j["area_ratios"] = r.area_ratios;
  j["area_ratio_bounded"] = r.area_ratio_bounded;
  if (r.has_normalization) {
    j["normalization"] = {{"a2_at_marked", r.a2_at_marked},
                          {"max_a2_window", r.max_a2_window},
                          {"ok", r.normalization_ok}};
  }
  j["limit"] = {{"converged", r.converged_limit}, {"gauges", r.convergence_gauges}};
  return j.dump(2);
}

void write_report(const std::filesystem::path& path, const BlowupReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << report_to_json(report) << '\n';
}

BlowupReport read_report(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  json j;
  is >> j;
  BlowupReport r;
  r.source = j.value("source", "");
  r.mode = j.value("mode", "symplectic") == "lagrangian" ? VerifyMode::Lagrangian
                                                         : VerifyMode::Symplectic;
  r.no_blowup = j.value("no_blowup", false);
  r.no_blowup_reason = j.value("no_blowup_reason", "");
  if (j.contains("type_verdict")) {
    r.has_type = true;
    type_from_json(j["type_verdict"], r.type);
  }
  if (j.contains("minimality")) {
    r.max_mean_curvature = j["minimality"].value("max_mean_curvature", 0.0);
    r.minimal = j["minimality"].value("minimal", false);
  }
  if (j.contains("angle")) {
    const auto& a = j["angle"];
    r.holomorphicity_gap = a.value("holomorphicity_gap", 0.0);
    r.cos_alpha_spread = a.value("cos_alpha_spread", 0.0);
    r.cos_alpha_level = a.value("cos_alpha_level", 0.0);
    r.jstar_reported = a.value("jstar_reported", false);
    r.jstar_angle_error = a.value("jstar_angle_error", 0.0);
    r.beta_spread = a.value("beta_spread", 0.0);
  }
  if (j.contains("curvature")) {
    const auto& c = j["curvature"];
    r.min_gauss = c.value("min_gauss", 0.0);
    r.max_gauss = c.value("max_gauss", 0.0);
    r.curvature_window_ok = c.value("window_ok", false);
    r.a2_at_origin = c.value("a2_at_origin", 0.0);
    r.max_a2 = c.value("max_a2", 0.0);
    r.nontrivial = c.value("nontrivial", false);
  }
  if (j.contains("structure_equation")) {
    r.e1_residual_l2 = j["structure_equation"].value("l2", 0.0);
    r.e1_residual_max = j["structure_equation"].value("max", 0.0);
    r.e1_vertices = j["structure_equation"].value("vertices", 0);
  }
  if (j.contains("quantization")) {
    const auto& q = j["quantization"];
    r.quantization.n_hat = q.value("n_hat", 0.0);
    r.quantization.nearest_integer_distance = q.value("nearest_integer_distance", 0.0);
    r.quantization.radii = q.value("radii", std::vector<double>{});
    r.quantization.c_of_r = q.value("c_of_r", std::vector<double>{});
    r.quantization.ok = q.value("ok", false);
  }
  if (j.contains("components")) {
    for (const auto& c : j["components"]) {
      r.components.push_back({c.value("faces", 0), c.value("simplicity_ratio", 0.0)});
    }
  }
  r.area_ratios = j.value("area_ratios", std::vector<double>{});
  r.area_ratio_bounded = j.value("area_ratio_bounded", false);
  if (j.contains("normalization")) {
    r.has_normalization = true;
    r.a2_at_marked = j["normalization"].value("a2_at_marked", 0.0);
    r.max_a2_window = j["normalization"].value("max_a2_window", 0.0);
    r.normalization_ok = j["normalization"].value("ok", false);
  }
  if (j.contains("limit")) {
    r.converged_limit = j["limit"].value("converged", false);
    r.convergence_gauges = j["limit"].value("gauges", std::vector<double>{});
  }
  return r;
}

std::string render_report(const BlowupReport& r) {
  std::ostringstream os;
  os << "source: " << (r.source.empty() ? "<unknown>" : r.source) << "\n";
  os << "mode: " << (r.mode == VerifyMode::Symplectic ? "symplectic" : "lagrangian") << "\n";
  if (r.no_blowup) {
    os << "verdict: no blow-up detected (" << r.no_blowup_reason << ")\n";
    return os.str();
  }
  if (r.has_type) {
    os << "singularity type: " << to_string(r.type.type)
       << "  (final m = " << r.type.final_m << ", trailing slope = " << r.type.trailing_slope
       << ")\n";
  }
  os << "limit converged: " << (r.converged_limit ? "yes" : "no") << "\n";
  os << "minimality: max|H| = " << r.max_mean_curvature << " -> "
     << (r.minimal ? "minimal" : "minimality failed") << "\n";
  if (r.mode == VerifyMode::Symplectic) {
    os << "holomorphicity gap 1 - min cos alpha = " << r.holomorphicity_gap
       << " (spread " << r.cos_alpha_spread << ", level " << r.cos_alpha_level << ")\n";
    if (r.jstar_reported) {
      os << "rotated-structure angle error = " << r.jstar_angle_error << "\n";
    }
  } else {
    os << "lagrangian angle spread = " << r.beta_spread << "\n";
  }
  os << "gauss curvature in [" << r.min_gauss << ", " << r.max_gauss << "] window "
     << (r.curvature_window_ok ? "ok" : "violated") << "\n";
  os << "|A|^2 at origin = " << r.a2_at_origin << ", max = " << r.max_a2
     << (r.nontrivial ? " (nontrivial)" : " (flat/trivial)") << "\n";
  os << "structure-equation residual L2 = " << r.e1_residual_l2 << ", max = "
     << r.e1_residual_max << " on " << r.e1_vertices << " vertices\n";
  os << "quantization N = " << r.quantization.n_hat << " (distance to integer "
     << r.quantization.nearest_integer_distance << ")\n";
  os << "components: " << r.components.size() << "\n";
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    os << "  [" << i << "] faces = " << r.components[i].faces
       << ", simplicity ratio = " << r.components[i].simplicity_ratio << "\n";
  }
  os << "area ratios:";
  for (double a : r.area_ratios) os << ' ' << a;
  os << (r.area_ratio_bounded ? "  (bounded)" : "  (unbounded!)") << "\n";
  if (r.has_normalization) {
    os << "rescaling normalization: |A|^2(marked) = " << r.a2_at_marked
       << ", window max = " << r.max_a2_window << " -> "
       << (r.normalization_ok ? "ok" : "violated") << "\n";
  }
  return os.str();
}

}  // namespace kf
