#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gccnmf {

// De-interleaved float samples, nominally in [-1, 1].
struct AudioBuffer {
  std::vector<std::vector<float>> channels;
  std::uint32_t sample_rate = 16000;

  std::size_t channel_count() const noexcept { return channels.size(); }
  std::size_t frames() const noexcept { return channels.empty() ? 0 : channels[0].size(); }
};

enum class WavFormat { kPcm16, kFloat32 };

// PCM 16-bit or IEEE float32, 1 or 2 channels (WAVE_FORMAT_EXTENSIBLE
// accepted). Errors: kMalformedHeader, kUnsupportedCodec, kTruncated, kIo.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer parse_wav(std::span<const std::uint8_t> bytes);

// pcm16 rounds half away from zero after scaling by 32768 and clips.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavFormat format);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavFormat format);

}  // namespace gccnmf
