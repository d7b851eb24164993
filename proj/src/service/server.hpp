#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "io/wav.hpp"
#include "nmf/dictionary.hpp"
#include "pipeline/config.hpp"
#include "service/telemetry_hub.hpp"

namespace gccnmf {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  EnhancerConfig enhancer;
  // Stereo source, looped. Must match enhancer.sample_rate.
  AudioBuffer source;
  bool realtime = true;       // pace the audio loop at one hop per hop duration
  bool stream_audio = false;  // also broadcast enhanced PCM frames
  std::size_t queue_capacity = 16;
};

struct ServiceStats {
  std::uint64_t frames = 0;
  std::uint64_t telemetry_published = 0;
  std::uint64_t telemetry_dropped = 0;
  std::size_t connections = 0;
};

// Live enhancer behind a WebSocket endpoint. Text frames carry control
// messages and acks, binary frames carry telemetry (and optional audio).
// The audio loop runs on its own thread and never waits on the network.
class Service {
 public:
  // Binds immediately; throws Error(kPortBusy) when the address is taken.
  Service(ServiceConfig config, std::shared_ptr<const Dictionary> dict);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::uint16_t port() const noexcept;
  ServiceStats stats() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gccnmf
