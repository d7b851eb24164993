#include "pipeline/control.hpp"

#include "common/error.hpp"

namespace gccnmf {

std::string to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::kSetMaskParams: return "set_mask_params";
    case ControlKind::kSetTdoaOverride: return "set_tdoa_override";
    case ControlKind::kClearTdoaOverride: return "clear_tdoa_override";
    case ControlKind::kSetLocalizer: return "set_localizer";
    case ControlKind::kSetDictionary: return "set_dictionary";
  }
  return "unknown";
}

namespace {

ControlKind kind_from_string(const std::string& s) {
  for (auto k : {ControlKind::kSetMaskParams, ControlKind::kSetTdoaOverride,
                 ControlKind::kClearTdoaOverride, ControlKind::kSetLocalizer,
                 ControlKind::kSetDictionary})
    if (to_string(k) == s) return k;
  fail(ErrorCode::kInvalidInput, "unknown control kind '" + s + "'");
}

}  // namespace

ControlMessage parse_control(const std::string& text,
                             std::optional<std::int64_t>* msg_id_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kInvalidInput, "control message is not valid JSON");
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidInput, "control message must be a JSON object");
  if (!j.contains("msg_id") || !j["msg_id"].is_number_integer())
    fail(ErrorCode::kInvalidInput, "control message needs an integer msg_id");
  ControlMessage msg;
  msg.msg_id = j["msg_id"].get<std::int64_t>();
  if (msg_id_out) *msg_id_out = msg.msg_id;
  if (!j.contains("kind") || !j["kind"].is_string())
    fail(ErrorCode::kInvalidInput, "control message needs a string kind");
  msg.kind = kind_from_string(j["kind"].get<std::string>());
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) fail(ErrorCode::kInvalidInput, "payload must be an object");
    msg.payload = j["payload"];
  }
  return msg;
}

std::string ControlAck::to_json() const {
  nlohmann::json j = {{"type", "ack"},
                      {"msg_id", msg_id},
                      {"status", applied ? "applied" : "rejected"}};
  if (applied)
    j["frame"] = frame_index;
  else
    j["reason"] = reason;
  return j.dump();
}

}  // namespace gccnmf
