#include "pipeline/telemetry.hpp"

#include <bit>
#include <cstring>

#include "common/error.hpp"
#include "io/byte_io.hpp"

namespace gccnmf {
namespace {

void header(ByteWriter& w, std::uint16_t kind, std::uint64_t frame_index) {
  w.tag(kTelemetryMagic);
  w.u16(kTelemetryVersion);
  w.u16(kind);
  w.u64(frame_index);
}

void f32(ByteWriter& w, float v) { w.u32(std::bit_cast<std::uint32_t>(v)); }
float f32(ByteReader& r) { return std::bit_cast<float>(r.u32()); }

std::uint32_t mode_code(LocalizerMode m) {
  switch (m) {
    case LocalizerMode::kOffline: return 0;
    case LocalizerMode::kAccumulated: return 1;
    case LocalizerMode::kSliding: return 2;
  }
  return 1;
}

}  // namespace

std::vector<std::uint8_t> encode_telemetry(const TelemetryFrame& t) {
  ByteWriter w;
  header(w, kPayloadTelemetry, t.frame_index);
  w.u32(static_cast<std::uint32_t>(t.tau_index));
  w.u32(t.flags);
  w.u32(mode_code(t.localizer_mode));
  w.u32(t.localizer_window);
  f32(w, static_cast<float>(t.params.epsilon));
  f32(w, static_cast<float>(t.params.alpha));
  f32(w, static_cast<float>(t.params.beta));
  f32(w, static_cast<float>(t.params.eta));
  f32(w, t.latency_ms);
  f32(w, t.frame_time_us);
  w.u64(static_cast<std::uint64_t>(t.last_msg_id));
  w.u32(static_cast<std::uint32_t>(t.angular.size()));
  w.u32(static_cast<std::uint32_t>(t.mask.size()));
  w.u32(static_cast<std::uint32_t>(t.gain.size()));
  for (float v : t.angular) f32(w, v);
  for (float v : t.mask) f32(w, v);
  for (float v : t.gain) f32(w, v);
  return w.take();
}

TelemetryFrame decode_telemetry(std::span<const std::uint8_t> bytes) {
  try {
    ByteReader r(bytes);
    if (r.remaining() < 16 || std::memcmp(bytes.data(), kTelemetryMagic, 4) != 0)
      fail(ErrorCode::kCorrupted, "bad telemetry magic");
    r.skip(4);
    if (r.u16() != kTelemetryVersion) fail(ErrorCode::kCorrupted, "unknown telemetry version");
    if (r.u16() != kPayloadTelemetry) fail(ErrorCode::kCorrupted, "not a telemetry payload");
    TelemetryFrame t;
    t.frame_index = r.u64();
    t.tau_index = static_cast<std::int32_t>(r.u32());
    t.flags = r.u32();
    const std::uint32_t mode = r.u32();
    if (mode > 2) fail(ErrorCode::kCorrupted, "bad localizer mode");
    t.localizer_mode = static_cast<LocalizerMode>(mode);
    t.localizer_window = r.u32();
    t.params.epsilon = f32(r);
    t.params.alpha = f32(r);
    t.params.beta = f32(r);
    t.params.eta = f32(r);
    t.params.mode = (t.flags & kFlagSoftMask) ? MaskMode::kSoft : MaskMode::kBinary;
    t.params.coefficients =
        (t.flags & kFlagAllOnes) ? CoefficientMode::kAllOnes : CoefficientMode::kInferred;
    t.latency_ms = f32(r);
    t.frame_time_us = f32(r);
    t.last_msg_id = static_cast<std::int64_t>(r.u64());
    const std::uint32_t k = r.u32(), m = r.u32(), f = r.u32();
    if (static_cast<std::uint64_t>(k) * 4 + static_cast<std::uint64_t>(m) * 4 +
            static_cast<std::uint64_t>(f) * 4 != r.remaining())
      fail(ErrorCode::kCorrupted, "telemetry array lengths disagree with payload size");
    t.angular.resize(k);
    t.mask.resize(m);
    t.gain.resize(f);
    for (auto& v : t.angular) v = f32(r);
    for (auto& v : t.mask) v = f32(r);
    for (auto& v : t.gain) v = f32(r);
    return t;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTruncated) fail(ErrorCode::kCorrupted, e.what());
    throw;
  }
}

std::vector<std::uint8_t> encode_audio(std::uint64_t frame_index,
                                       std::span<const float> left,
                                       std::span<const float> right) {
  require(left.size() == right.size(), ErrorCode::kInvalidInput, "channel length mismatch");
  ByteWriter w;
  header(w, kPayloadAudio, frame_index);
  w.u32(2);
  w.u32(static_cast<std::uint32_t>(left.size()));
  for (std::size_t i = 0; i < left.size(); ++i) {
    f32(w, left[i]);
    f32(w, right[i]);
  }
  return w.take();
}

std::vector<float> downsample_mask(std::span<const double> mask) {
  if (mask.empty()) return {};
  const std::size_t groups = std::min(mask.size(), kMaxMaskEntries);
  std::vector<float> out(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * mask.size() / groups;
    const std::size_t hi = (g + 1) * mask.size() / groups;
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += mask[i];
    out[g] = static_cast<float>(sum / static_cast<double>(hi - lo));
  }
  return out;
}

}  // namespace gccnmf
