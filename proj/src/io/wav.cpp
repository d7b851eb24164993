#include "io/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "common/error.hpp"
#include "io/byte_io.hpp"

namespace gccnmf {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
};

FmtChunk parse_fmt(ByteReader chunk) {
  if (chunk.remaining() < 16) fail(ErrorCode::kMalformedHeader, "fmt chunk shorter than 16 bytes");
  FmtChunk fmt;
  fmt.format = chunk.u16();
  fmt.channels = chunk.u16();
  fmt.sample_rate = chunk.u32();
  chunk.u32();  // byte rate
  fmt.block_align = chunk.u16();
  fmt.bits = chunk.u16();
  if (fmt.format == kFormatExtensible) {
    if (chunk.remaining() < 24)
      fail(ErrorCode::kMalformedHeader, "extensible fmt chunk is truncated");
    chunk.u16();  // cbSize
    chunk.u16();  // valid bits
    chunk.u32();  // channel mask
    fmt.format = chunk.u16();  // first two bytes of the subformat GUID
  }
  return fmt;
}

}  // namespace

AudioBuffer parse_wav(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  if (reader.remaining() < 12 || reader.tag() != "RIFF")
    fail(ErrorCode::kMalformedHeader, "missing RIFF header");
  reader.u32();  // RIFF size; not trusted
  if (reader.tag() != "WAVE") fail(ErrorCode::kMalformedHeader, "missing WAVE tag");

  std::optional<FmtChunk> fmt;
  while (reader.remaining() >= 8) {
    const std::string id = reader.tag();
    const std::uint32_t size = reader.u32();
    if (id == "fmt ") {
      if (size > reader.remaining()) fail(ErrorCode::kMalformedHeader, "fmt chunk overruns file");
      fmt = parse_fmt(reader.sub(size));
      reader.skip(size + (size & 1u));
      continue;
    }
    if (id == "data") {
      if (!fmt) fail(ErrorCode::kMalformedHeader, "data chunk before fmt chunk");
      if (fmt->format != kFormatPcm && fmt->format != kFormatFloat)
        fail(ErrorCode::kUnsupportedCodec,
             "unsupported WAV codec " + std::to_string(fmt->format));
      const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
      const bool f32 = fmt->format == kFormatFloat && fmt->bits == 32;
      if (!pcm16 && !f32)
        fail(ErrorCode::kUnsupportedCodec,
             "unsupported sample format: codec " + std::to_string(fmt->format) + ", " +
                 std::to_string(fmt->bits) + " bits");
      if (fmt->channels < 1 || fmt->channels > 2)
        fail(ErrorCode::kUnsupportedCodec,
             "unsupported channel count " + std::to_string(fmt->channels));
      if (fmt->sample_rate == 0) fail(ErrorCode::kMalformedHeader, "sample rate is zero");
      const std::size_t width = pcm16 ? 2 : 4;
      const std::size_t frame_bytes = width * fmt->channels;
      if (size > reader.remaining() || size % frame_bytes != 0)
        fail(ErrorCode::kTruncated,
             "data chunk declares " + std::to_string(size) + " bytes, " +
                 std::to_string(reader.remaining()) + " available");
      const std::size_t frames = size / frame_bytes;
      AudioBuffer out;
      out.sample_rate = fmt->sample_rate;
      out.channels.assign(fmt->channels, std::vector<float>(frames));
      ByteReader data = reader.sub(size);
      for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < fmt->channels; ++c) {
          if (pcm16) {
            out.channels[c][i] = static_cast<float>(static_cast<std::int16_t>(data.u16())) / 32768.0f;
          } else {
            out.channels[c][i] = std::bit_cast<float>(data.u32());
          }
        }
      }
      return out;
    }
    // Unknown chunk: skip with pad byte. A short trailing chunk is tolerated.
    if (size > reader.remaining()) break;
    reader.skip(std::min<std::size_t>(size + (size & 1u), reader.remaining()));
  }
  if (!fmt) fail(ErrorCode::kMalformedHeader, "no fmt chunk");
  fail(ErrorCode::kTruncated, "no data chunk");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavFormat format) {
  const std::size_t channels = buffer.channel_count();
  require(channels == 1 || channels == 2, ErrorCode::kInvalidInput,
          "WAV output supports 1 or 2 channels");
  for (const auto& ch : buffer.channels)
    require(ch.size() == buffer.frames(), ErrorCode::kInvalidInput,
            "channels differ in length");
  const std::size_t width = format == WavFormat::kPcm16 ? 2 : 4;
  const std::size_t data_bytes = width * channels * buffer.frames();
  ByteWriter w;
  w.tag("RIFF");
  w.u32(static_cast<std::uint32_t>(36 + data_bytes));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(16);
  w.u16(format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u32(buffer.sample_rate);
  w.u32(static_cast<std::uint32_t>(buffer.sample_rate * width * channels));
  w.u16(static_cast<std::uint16_t>(width * channels));
  w.u16(static_cast<std::uint16_t>(8 * width));
  w.tag("data");
  w.u32(static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < buffer.frames(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float x = buffer.channels[c][i];
      if (format == WavFormat::kPcm16) {
        const double scaled = std::round(static_cast<double>(x) * 32768.0);
        const double clipped = std::clamp(std::isnan(scaled) ? 0.0 : scaled, -32768.0, 32767.0);
        w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(clipped)));
      } else {
        w.u32(std::bit_cast<std::uint32_t>(x));
      }
    }
  }
  return w.take();
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavFormat format) {
  const auto bytes = encode_wav(buffer, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace gccnmf
