#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mask/mask.hpp"
#include "spatial/localizer.hpp"

namespace gccnmf {

// Binary wire layout, all little-endian. Every message starts with a 16-byte
// header:
//   0  4  magic "GCNT"
//   4  u16 version (1)
//   6  u16 payload kind (1 = telemetry, 2 = audio)
//   8  u64 frame index
// Telemetry payload (kind 1), starting at byte 16:
//   i32 tau index, u32 flags, u32 localizer mode, u32 localizer window,
//   f32 epsilon, f32 alpha, f32 beta (+inf allowed), f32 eta,
//   f32 latency ms, f32 frame time us, i64 last applied msg id (-1 none),
//   u32 K, u32 mask length, u32 F,
//   f32[K] angular spectrum, f32[mask length] atom mask, f32[F] gain
// Audio payload (kind 2): u32 channels, u32 frames, f32[channels*frames]
// interleaved samples.
inline constexpr char kTelemetryMagic[4] = {'G', 'C', 'N', 'T'};
inline constexpr std::uint16_t kTelemetryVersion = 1;
inline constexpr std::uint16_t kPayloadTelemetry = 1;
inline constexpr std::uint16_t kPayloadAudio = 2;
inline constexpr std::size_t kMaxMaskEntries = 256;

enum TelemetryFlags : std::uint32_t {
  kFlagOverride = 1u << 0,
  kFlagLoopingSource = 1u << 1,
  kFlagSoftMask = 1u << 2,
  kFlagAllOnes = 1u << 3,
};

struct TelemetryFrame {
  std::uint64_t frame_index = 0;
  std::int32_t tau_index = 0;
  std::uint32_t flags = 0;
  LocalizerMode localizer_mode = LocalizerMode::kAccumulated;
  std::uint32_t localizer_window = 0;
  MaskParams params;
  float latency_ms = 0.0f;
  float frame_time_us = 0.0f;
  std::int64_t last_msg_id = -1;
  std::vector<float> angular;
  std::vector<float> mask;  // atom mask, averaged down to <= kMaxMaskEntries
  std::vector<float> gain;

  bool operator==(const TelemetryFrame&) const = default;
};

std::vector<std::uint8_t> encode_telemetry(const TelemetryFrame& frame);
// Throws kCorrupted on a bad magic/version/kind or inconsistent lengths.
TelemetryFrame decode_telemetry(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_audio(std::uint64_t frame_index,
                                       std::span<const float> left,
                                       std::span<const float> right);

// Groups consecutive atoms so the result has at most kMaxMaskEntries values.
std::vector<float> downsample_mask(std::span<const double> mask);

}  // namespace gccnmf
