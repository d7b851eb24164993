#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nmf/dictionary.hpp"

namespace gccnmf {

// Container layout:
//   8 bytes  magic "GCNMFDIC"
//   u32 LE   header length H
//   H bytes  UTF-8 JSON metadata (format_version, sample_rate, frame_size,
//            bins, atoms, window_kind, atom_norm, method, seed, iterations,
//            train_frames)
//   bins*atoms float32 LE, column-major (atom after atom)
inline constexpr int kDictionaryFormatVersion = 1;

std::vector<std::uint8_t> encode_dictionary(const Dictionary& dict);
// Errors: kVersionMismatch, kCorrupted (bad magic/header, size disagreement),
// kInvariantViolation (negative entries, unnormalized atoms).
Dictionary decode_dictionary(std::span<const std::uint8_t> bytes);

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& path);

}  // namespace gccnmf
