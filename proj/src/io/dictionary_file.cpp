#include "io/dictionary_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "io/byte_io.hpp"

namespace gccnmf {
namespace {

constexpr char kMagic[8] = {'G', 'C', 'N', 'M', 'F', 'D', 'I', 'C'};

nlohmann::json header_for(const Dictionary& dict) {
  return {
      {"format_version", kDictionaryFormatVersion},
      {"sample_rate", dict.layout.sample_rate},
      {"frame_size", dict.layout.frame_size},
      {"bins", dict.bins()},
      {"atoms", dict.size()},
      {"window_kind", to_string(dict.layout.window_kind)},
      {"atom_norm", "l1"},
      {"method", dict.provenance.method},
      {"seed", dict.provenance.seed},
      {"iterations", dict.provenance.iterations},
      {"train_frames", dict.provenance.train_frames},
  };
}

}  // namespace

std::vector<std::uint8_t> encode_dictionary(const Dictionary& dict) {
  const std::string header = header_for(dict).dump();
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes({reinterpret_cast<const std::uint8_t*>(header.data()), header.size()});
  for (Eigen::Index d = 0; d < dict.atoms.cols(); ++d)
    for (Eigen::Index f = 0; f < dict.atoms.rows(); ++f)
      w.u32(std::bit_cast<std::uint32_t>(dict.atoms(f, d)));
  return w.take();
}

Dictionary decode_dictionary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    fail(ErrorCode::kCorrupted, "not a dictionary file (bad magic)");
  ByteReader r(bytes.subspan(8));
  const std::uint32_t header_len = r.u32();
  if (header_len > r.remaining()) fail(ErrorCode::kCorrupted, "header length overruns file");
  const auto header_bytes = r.bytes(header_len);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorrupted, std::string("dictionary header is not JSON: ") + e.what());
  }
  Dictionary dict;
  std::size_t bins = 0, atoms = 0;
  try {
    const int version = h.at("format_version").get<int>();
    if (version != kDictionaryFormatVersion)
      fail(ErrorCode::kVersionMismatch,
           "dictionary format version " + std::to_string(version) + ", expected " +
               std::to_string(kDictionaryFormatVersion));
    dict.layout.sample_rate = h.at("sample_rate").get<double>();
    dict.layout.frame_size = h.at("frame_size").get<std::size_t>();
    dict.layout.window_kind = window_kind_from_string(h.at("window_kind").get<std::string>());
    bins = h.at("bins").get<std::size_t>();
    atoms = h.at("atoms").get<std::size_t>();
    if (h.value("atom_norm", "l1") != "l1")
      fail(ErrorCode::kCorrupted, "unsupported atom normalization");
    dict.provenance.method = h.value("method", "nmf");
    dict.provenance.seed = h.value("seed", std::uint64_t{0});
    dict.provenance.iterations = h.value("iterations", 0);
    dict.provenance.train_frames = h.value("train_frames", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorrupted, std::string("dictionary header is incomplete: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kVersionMismatch || e.code() == ErrorCode::kCorrupted) throw;
    fail(ErrorCode::kCorrupted, e.what());
  }
  if (bins != dict.layout.bins())
    fail(ErrorCode::kCorrupted, "header declares " + std::to_string(bins) +
                                    " bins but frame size implies " +
                                    std::to_string(dict.layout.bins()));
  if (atoms == 0) fail(ErrorCode::kCorrupted, "header declares zero atoms");
  if (r.remaining() != bins * atoms * 4)
    fail(ErrorCode::kCorrupted, "payload holds " + std::to_string(r.remaining()) +
                                    " bytes, header implies " +
                                    std::to_string(bins * atoms * 4));
  dict.atoms.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(atoms));
  for (Eigen::Index d = 0; d < dict.atoms.cols(); ++d)
    for (Eigen::Index f = 0; f < dict.atoms.rows(); ++f)
      dict.atoms(f, d) = std::bit_cast<float>(r.u32());
  dict.validate();
  return dict;
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
  dict.validate();
  const auto bytes = encode_dictionary(dict);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open dictionary " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_dictionary(bytes);
}

}  // namespace gccnmf
