#include "pipeline/config.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "common/error.hpp"

namespace gccnmf {

WindowConfig WindowConfig::symmetric(std::size_t frame_size, std::size_t hop) {
  return {WindowKind::kSymmetric, frame_size, frame_size / 2, hop};
}

WindowConfig WindowConfig::asymmetric(std::size_t frame_size, std::size_t product_half,
                                      std::size_t hop) {
  return {WindowKind::kAsymmetric, frame_size, product_half, hop};
}

WindowPair WindowConfig::make_pair() const {
  return kind == WindowKind::kSymmetric ? symmetric_windows(frame_size, hop)
                                        : asymmetric_windows(frame_size, product_half, hop);
}

void EnhancerConfig::validate() const {
  require(sample_rate > 0.0, ErrorCode::kInvalidParameter, "sample_rate must be positive");
  mask.validate();
  require(grid.count >= 2, ErrorCode::kInvalidParameter, "TDOA grid needs >= 2 points");
  require(grid.tau_max() > 0.0, ErrorCode::kInvalidParameter, "tau_max must be positive");
  require(inference_iterations >= 0, ErrorCode::kInvalidParameter,
          "inference_iterations must be >= 0");
  require(localizer.mode != LocalizerMode::kSliding || localizer.window >= 1,
          ErrorCode::kInvalidParameter, "sliding window must be >= 1 frame");
  if (tdoa_override)
    require(*tdoa_override < grid.count, ErrorCode::kInvalidParameter,
            "tdoa override index outside the grid");
  (void)window.make_pair();
}

namespace {

double beta_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return MaskParams::kInfinity;
    fail(ErrorCode::kInvariantViolation, "beta must be a number or \"inf\"");
  }
  if (!j.is_number()) fail(ErrorCode::kInvariantViolation, "beta must be a number or \"inf\"");
  return j.get<double>();
}

double number_field(const nlohmann::json& j, const char* name) {
  if (!j.is_number()) fail(ErrorCode::kInvariantViolation, std::string(name) + " must be a number");
  return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const MaskParams& p) {
  j = {{"epsilon", p.epsilon},
       {"alpha", p.alpha},
       {"eta", p.eta},
       {"mode", to_string(p.mode)},
       {"coefficients", to_string(p.coefficients)}};
  if (std::isinf(p.beta))
    j["beta"] = "inf";
  else
    j["beta"] = p.beta;
}

void merge_mask_params(const nlohmann::json& j, MaskParams& p) {
  if (!j.is_object()) fail(ErrorCode::kInvariantViolation, "mask params must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon") p.epsilon = number_field(value, "epsilon");
    else if (key == "alpha") p.alpha = number_field(value, "alpha");
    else if (key == "eta") p.eta = number_field(value, "eta");
    else if (key == "beta") p.beta = beta_from_json(value);
    else if (key == "mode") p.mode = mask_mode_from_string(value.get<std::string>());
    else if (key == "coefficients")
      p.coefficients = coefficient_mode_from_string(value.get<std::string>());
    else fail(ErrorCode::kInvariantViolation, "unknown mask parameter '" + key + "'");
  }
}

void to_json(nlohmann::json& j, const EnhancerConfig& c) {
  nlohmann::json window = {{"kind", to_string(c.window.kind)},
                           {"frame_size", c.window.frame_size},
                           {"hop", c.window.hop}};
  if (c.window.kind == WindowKind::kAsymmetric) window["product_half"] = c.window.product_half;
  j = {{"sample_rate", c.sample_rate},
       {"window", window},
       {"mask", c.mask},
       {"localizer", {{"mode", to_string(c.localizer.mode)}, {"window", c.localizer.window}}},
       {"grid",
        {{"count", c.grid.count},
         {"mic_spacing_m", c.grid.mic_spacing_m},
         {"speed_of_sound", c.grid.speed_of_sound},
         {"margin", c.grid.margin}}},
       {"inference_iterations", c.inference_iterations},
       {"seed", c.seed}};
  if (c.tdoa_override)
    j["tdoa_override"] = *c.tdoa_override;
  else
    j["tdoa_override"] = nullptr;
}

EnhancerConfig enhancer_config_from_json(const nlohmann::json& j) {
  EnhancerConfig c;
  try {
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    if (j.contains("window")) {
      const auto& w = j["window"];
      const auto kind = window_kind_from_string(w.value("kind", std::string("symmetric")));
      const std::size_t n = w.value("frame_size", std::size_t{1024});
      if (kind == WindowKind::kSymmetric) {
        c.window = WindowConfig::symmetric(n, w.value("hop", n / 4));
      } else {
        const std::size_t m = w.value("product_half", std::size_t{16});
        c.window = WindowConfig::asymmetric(n, m, w.value("hop", m / 2));
      }
    }
    if (j.contains("mask")) merge_mask_params(j["mask"], c.mask);
    if (j.contains("localizer")) {
      const auto& l = j["localizer"];
      c.localizer.mode = localizer_mode_from_string(
          l.value("mode", to_string(c.localizer.mode)));
      c.localizer.window = l.value("window", c.localizer.window);
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid.count = g.value("count", c.grid.count);
      c.grid.mic_spacing_m = g.value("mic_spacing_m", c.grid.mic_spacing_m);
      c.grid.speed_of_sound = g.value("speed_of_sound", c.grid.speed_of_sound);
      c.grid.margin = g.value("margin", c.grid.margin);
    }
    if (j.contains("inference_iterations")) {
      const int iters = j["inference_iterations"].get<int>();
      if (iters < 0) {
        c.mask.coefficients = CoefficientMode::kAllOnes;
      } else {
        c.inference_iterations = iters;
        if (!j.contains("mask") || !j["mask"].contains("coefficients"))
          c.mask.coefficients = CoefficientMode::kInferred;
      }
    }
    if (j.contains("tdoa_override") && !j["tdoa_override"].is_null())
      c.tdoa_override = j["tdoa_override"].get<std::size_t>();
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParameter, std::string("bad enhancer config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace gccnmf
