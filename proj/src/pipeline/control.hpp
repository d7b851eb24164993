#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "nmf/dictionary.hpp"

namespace gccnmf {

enum class ControlKind {
  kSetMaskParams,
  kSetTdoaOverride,
  kClearTdoaOverride,
  kSetLocalizer,
  kSetDictionary,
};

std::string to_string(ControlKind kind);

// One control request. `source` identifies the sender (a connection) so that
// msg_id monotonicity and acknowledgement routing are per sender.
struct ControlMessage {
  std::int64_t msg_id = 0;
  ControlKind kind = ControlKind::kSetMaskParams;
  nlohmann::json payload = nlohmann::json::object();
  std::uint64_t source = 0;
  // Filled for kSetDictionary before the message reaches the audio thread.
  std::shared_ptr<const Dictionary> dictionary;
};

// Parses {"msg_id": n, "kind": "...", "payload": {...}}. Throws Error with
// kInvalidInput describing the problem; the msg_id, when readable, is returned
// through `msg_id_out` so the rejection can still be acknowledged.
ControlMessage parse_control(const std::string& text,
                             std::optional<std::int64_t>* msg_id_out = nullptr);

struct ControlAck {
  std::uint64_t source = 0;
  std::int64_t msg_id = 0;
  bool applied = false;
  std::string reason;
  std::uint64_t frame_index = 0;  // frame boundary where it was applied

  // {"type":"ack","msg_id":..,"status":"applied"|"rejected","reason":..,"frame":..}
  std::string to_json() const;
};

}  // namespace gccnmf
