#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pipeline/config.hpp"
#include "pipeline/control.hpp"
#include "support/check.hpp"

using namespace gccnmf;
using nlohmann::json;

TEST_CASE("default enhancer configuration", "[config]") {
  const EnhancerConfig c;
  c.validate();
  REQUIRE(c.sample_rate == 16000.0);
  REQUIRE(c.window.kind == WindowKind::kSymmetric);
  REQUIRE(c.window.frame_size == 1024);
  REQUIRE(c.window.hop == 256);
  REQUIRE(c.mask.epsilon == 3.0 / 64.0);
  REQUIRE(c.mask.alpha == 3.0 / 16.0);
  REQUIRE(c.mask.eta == 0.0);
  REQUIRE(std::isinf(c.mask.beta));
  REQUIRE(c.mask.coefficients == CoefficientMode::kAllOnes);
  REQUIRE(c.inference_iterations == 100);
  REQUIRE(c.grid.count == 128);
  REQUIRE_FALSE(c.tdoa_override.has_value());
}

TEST_CASE("configuration JSON round trip", "[config]") {
  EnhancerConfig c;
  c.window = WindowConfig::asymmetric(1024, 16, 8);
  c.mask.beta = 2.5;
  c.mask.eta = 0.1;
  c.mask.mode = MaskMode::kSoft;
  c.mask.coefficients = CoefficientMode::kInferred;
  c.localizer = {LocalizerMode::kSliding, 12};
  c.inference_iterations = 7;
  c.tdoa_override = 40;
  c.seed = 99;
  const json j = c;
  const auto back = enhancer_config_from_json(j);
  REQUIRE(json(back) == j);
  REQUIRE(back.window.product_half == 16);
  REQUIRE(back.mask == c.mask);
  REQUIRE(back.tdoa_override == std::optional<std::size_t>(40));
  REQUIRE(j["mask"]["beta"] == 2.5);
  EnhancerConfig d;
  REQUIRE(json(d)["mask"]["beta"] == "inf");
  REQUIRE(json(d)["tdoa_override"].is_null());
}

TEST_CASE("configuration JSON defaults and sentinels", "[config]") {
  auto c = enhancer_config_from_json(json::object());
  REQUIRE(json(c) == json(EnhancerConfig{}));
  c = enhancer_config_from_json({{"inference_iterations", -1}});
  REQUIRE(c.mask.coefficients == CoefficientMode::kAllOnes);
  c = enhancer_config_from_json({{"inference_iterations", 0}});
  REQUIRE(c.mask.coefficients == CoefficientMode::kInferred);
  REQUIRE(c.inference_iterations == 0);
  c = enhancer_config_from_json(
      {{"inference_iterations", 5}, {"mask", {{"coefficients", "all_ones"}}}});
  REQUIRE(c.mask.coefficients == CoefficientMode::kAllOnes);
  c = enhancer_config_from_json({{"window", {{"kind", "asymmetric"}}}});
  REQUIRE(c.window.product_half == 16);
  REQUIRE(c.window.hop == 8);
  c = enhancer_config_from_json({{"window", {{"frame_size", 512}}}});
  REQUIRE(c.window.hop == 128);
}

TEST_CASE("invalid configurations are rejected", "[config]") {
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"mask", {{"eta", 2.0}}}}),
                     ErrorCode::kInvariantViolation);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"mask", {{"beta", "huge"}}}}),
                     ErrorCode::kInvariantViolation);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"mask", {{"gamma", 1}}}}),
                     ErrorCode::kInvariantViolation);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"window", {{"kind", "symmetric"}, {"hop", 0}}}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json(
                         {{"window", {{"kind", "asymmetric"}, {"product_half", 15}}}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"tdoa_override", 128}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"localizer", {{"mode", "psychic"}}}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"localizer", {{"mode", "sliding"}, {"window", 0}}}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"sample_rate", "fast"}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"sample_rate", -1}}),
                     ErrorCode::kInvalidParameter);
  REQUIRE_ERROR_CODE(enhancer_config_from_json({{"grid", {{"count", 1}}}}),
                     ErrorCode::kInvalidParameter);
}

TEST_CASE("mask parameter merges are partial", "[config]") {
  MaskParams p;
  merge_mask_params({{"alpha", 0.5}, {"beta", 1}}, p);
  REQUIRE(p.alpha == 0.5);
  REQUIRE(p.beta == 1.0);
  REQUIRE(p.epsilon == 3.0 / 64.0);
  merge_mask_params({{"beta", "inf"}, {"mode", "soft"}}, p);
  REQUIRE(std::isinf(p.beta));
  REQUIRE(p.mode == MaskMode::kSoft);
  REQUIRE_ERROR_CODE(merge_mask_params(json::array(), p), ErrorCode::kInvariantViolation);
  REQUIRE_ERROR_CODE(merge_mask_params({{"epsilon", "wide"}}, p), ErrorCode::kInvariantViolation);
}

TEST_CASE("control message parsing", "[config][control]") {
  auto m = parse_control(R"({"msg_id": 3, "kind": "set_mask_params", "payload": {"eta": 0.5}})");
  REQUIRE(m.msg_id == 3);
  REQUIRE(m.kind == ControlKind::kSetMaskParams);
  REQUIRE(m.payload["eta"] == 0.5);
  m = parse_control(R"({"msg_id": 4, "kind": "clear_tdoa_override"})");
  REQUIRE(m.kind == ControlKind::kClearTdoaOverride);
  REQUIRE(m.payload.is_object());
  for (auto k : {"set_tdoa_override", "set_localizer", "set_dictionary"})
    REQUIRE(to_string(parse_control(json{{"msg_id", 1}, {"kind", k}}.dump()).kind) == k);

  std::optional<std::int64_t> id;
  REQUIRE_ERROR_CODE(parse_control("{not json", &id), ErrorCode::kInvalidInput);
  REQUIRE_FALSE(id.has_value());
  REQUIRE_ERROR_CODE(parse_control("[1,2]", &id), ErrorCode::kInvalidInput);
  REQUIRE_ERROR_CODE(parse_control(R"({"kind": "set_localizer"})", &id), ErrorCode::kInvalidInput);
  REQUIRE_ERROR_CODE(parse_control(R"({"msg_id": 1.5, "kind": "set_localizer"})", &id),
                     ErrorCode::kInvalidInput);
  REQUIRE_ERROR_CODE(parse_control(R"({"msg_id": 8, "kind": "reboot"})", &id),
                     ErrorCode::kInvalidInput);
  REQUIRE(id == std::optional<std::int64_t>(8));
  REQUIRE_ERROR_CODE(parse_control(R"({"msg_id": 9, "kind": "set_localizer", "payload": 3})", &id),
                     ErrorCode::kInvalidInput);
  REQUIRE(id == std::optional<std::int64_t>(9));
}

TEST_CASE("acknowledgement JSON", "[config][control]") {
  ControlAck ok{1, 5, true, "", 42};
  const auto a = json::parse(ok.to_json());
  REQUIRE(a == json{{"type", "ack"}, {"msg_id", 5}, {"status", "applied"}, {"frame", 42}});
  ControlAck no{1, 6, false, "eta must lie in [0, 1]", 0};
  const auto b = json::parse(no.to_json());
  REQUIRE(b["status"] == "rejected");
  REQUIRE(b["reason"] == "eta must lie in [0, 1]");
  REQUIRE_FALSE(b.contains("frame"));
}

namespace {

nlohmann::json load_schema(const std::string& name) {
  std::ifstream in(std::string(GCCNMF_DOCS_DIR) + "/schemas/" + name);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

std::set<std::string> keys(const nlohmann::json& j) {
  std::set<std::string> out;
  for (const auto& [k, v] : j.items()) out.insert(k);
  return out;
}

}  // namespace

TEST_CASE("schema files describe what the code accepts", "[config][docs]") {
  const auto control = load_schema("control.schema.json");
  std::set<std::string> kinds;
  for (const auto& k : control["properties"]["kind"]["enum"]) kinds.insert(k.get<std::string>());
  std::set<std::string> code_kinds;
  for (auto k : {ControlKind::kSetMaskParams, ControlKind::kSetTdoaOverride,
                 ControlKind::kClearTdoaOverride, ControlKind::kSetLocalizer,
                 ControlKind::kSetDictionary})
    code_kinds.insert(to_string(k));
  REQUIRE(kinds == code_kinds);

  const nlohmann::json mask = MaskParams{};
  REQUIRE(keys(control["$defs"]["mask_params"]["properties"]) == keys(mask));

  const auto config = load_schema("config.schema.json");
  const nlohmann::json c = EnhancerConfig{};
  REQUIRE(keys(config["properties"]) == keys(c));
  for (const char* group : {"window", "localizer", "grid"}) {
    INFO(group);
    for (const auto& k : keys(c[group])) REQUIRE(config["properties"][group]["properties"].contains(k));
  }

  const auto ack = load_schema("ack.schema.json");
  const auto applied = nlohmann::json::parse(ControlAck{0, 3, true, "", 7}.to_json());
  const auto rejected = nlohmann::json::parse(ControlAck{0, 4, false, "bad", 0}.to_json());
  for (const auto& a : {applied, rejected}) {
    for (const auto& r : ack["required"]) REQUIRE(a.contains(r.get<std::string>()));
    REQUIRE(a["type"] == ack["properties"]["type"]["const"]);
  }
  REQUIRE(keys(applied) == std::set<std::string>{"type", "msg_id", "status", "frame"});
  REQUIRE(keys(rejected) == std::set<std::string>{"type", "msg_id", "status", "reason"});
}
