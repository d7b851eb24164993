#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "eval/signals.hpp"
#include "io/wav.hpp"
#include "support/check.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace gccnmf;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Result run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(GCCNMF_CLI) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void write_stereo(const std::filesystem::path& p, std::uint64_t seed, int delay = 0) {
  const auto l = oracle::noise(16000, seed, 0.1);
  const auto r = oracle::shifted(l, delay);
  AudioBuffer b;
  b.channels = {std::vector<float>(l.begin(), l.end()), std::vector<float>(r.begin(), r.end())};
  write_wav(p, b, WavFormat::kFloat32);
}

// Small copy-to-train dictionary for the default 1024-sample window.
std::string make_dict(const TempDir& dir) {
  std::filesystem::create_directories(dir / "speech");
  std::filesystem::create_directories(dir / "noise");
  write_stereo(dir / "speech" / "s.wav", 1);
  write_stereo(dir / "noise" / "n.wav", 2);
  const auto path = (dir / "d.gcnd").string();
  const auto r = run(dir, "train --speech-dir " + (dir / "speech").string() + " --noise-dir " +
                              (dir / "noise").string() + " -D 16 --frames 32 --method copy -o " +
                              path);
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(std::filesystem::exists(path));
  return path;
}

}  // namespace

TEST_CASE("usage errors exit with status 2", "[cli]") {
  TempDir dir;
  REQUIRE(run(dir, "").code == 2);
  REQUIRE(run(dir, "frobnicate").code == 2);
  REQUIRE(run(dir, "enhance in.wav").code == 2);
  REQUIRE(run(dir, "eval --snr 1:2").code == 2);
  REQUIRE(run(dir, "eval --snr 10:0:5").code == 2);
  REQUIRE(run(dir, "bench --dict-sizes 1.5").code == 2);
  const auto r = run(dir, "eval --epsilon wide");
  REQUIRE(r.code == 2);
  REQUIRE(r.err.find("epsilon") != std::string::npos);
  REQUIRE(run(dir, "--version").code == 0);
  REQUIRE(run(dir, "--help").code == 0);
}

TEST_CASE("runtime failures exit with status 1", "[cli]") {
  TempDir dir;
  write_stereo(dir / "in.wav", 3);
  auto r = run(dir, "enhance " + (dir / "in.wav").string() + " " + (dir / "out.wav").string() +
                        " -d " + (dir / "missing.gcnd").string());
  REQUIRE(r.code == 1);
  REQUIRE(r.err.find("missing.gcnd") != std::string::npos);
  std::filesystem::create_directories(dir / "speech");
  std::filesystem::create_directories(dir / "noise");
  write_stereo(dir / "speech" / "s.wav", 1);
  r = run(dir, "train --speech-dir " + (dir / "speech").string() + " --noise-dir " +
                   (dir / "noise").string() + " -o " + (dir / "d.gcnd").string());
  REQUIRE(r.code == 1);
  REQUIRE(r.err.find("empty input") != std::string::npos);
}

TEST_CASE("train then enhance with a full-range window", "[cli]") {
  TempDir dir;
  const auto dict = make_dict(dir);
  write_stereo(dir / "in.wav", 4, 2);
  const auto in = (dir / "in.wav").string(), out = (dir / "out.wav").string();
  const auto r = run(dir, "enhance " + in + " " + out + " -d " + dict +
                              " --epsilon 2 --reference " + in);
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("total 80.000 ms") != std::string::npos);
  REQUIRE(r.out.find("snr: input inf dB") != std::string::npos);
  const auto a = read_wav(in), b = read_wav(out);
  REQUIRE(a.frames() == b.frames());
  const Stereo<double> ref{{a.channels[0].begin(), a.channels[0].end()},
                           {a.channels[1].begin(), a.channels[1].end()}};
  const Stereo<double> est{{b.channels[0].begin(), b.channels[0].end()},
                           {b.channels[1].begin(), b.channels[1].end()}};
  REQUIRE(snr_db(ref, est, 1024) > 100.0);

  // Near-full range still leaves the signal almost untouched.
  REQUIRE(run(dir, "enhance " + in + " " + out + " -d " + dict + " --epsilon 1").code == 0);
  const auto c = read_wav(out);
  const Stereo<double> est1{{c.channels[0].begin(), c.channels[0].end()},
                            {c.channels[1].begin(), c.channels[1].end()}};
  REQUIRE(snr_db(ref, est1, 1024) > 20.0);

  // Dictionary built for another window is refused.
  REQUIRE(run(dir, "enhance " + in + " " + out + " -d " + dict + " --frame-size 512 --hop 128")
              .code == 1);
}

TEST_CASE("eval prints one row per sweep cell", "[cli]") {
  TempDir dir;
  const auto r = run(dir, "eval --snr -40:40:10 --atoms 8 --seconds 1");
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(count_lines(r.out) == 10);
  REQUIRE(r.out.rfind("cell_id,", 0) == 0);
  const auto csv = (dir / "e.csv").string();
  const auto w = run(dir, "eval --snr 0 --epsilon 0.05,2 --atoms 8 --seconds 1 -o " + csv);
  REQUIRE(w.code == 0);
  REQUIRE(count_lines(slurp(csv)) == 3);
}

TEST_CASE("bench reports increasing frame times", "[cli]") {
  TempDir dir;
  const auto r = run(dir, "bench --dict-sizes 64,256,1024 --trials 100");
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  REQUIRE(line == "atoms,trials,mean_us,p95_us,hop_us,realtime_ok");
  std::vector<double> means;
  while (std::getline(lines, line)) {
    std::istringstream f(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(f, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    means.push_back(std::stod(cells[2]));
  }
  REQUIRE(means.size() == 3);
  REQUIRE(means[0] < means[1]);
  REQUIRE(means[1] < means[2]);
}

TEST_CASE("serve runs for a fixed duration", "[cli]") {
  TempDir dir;
  const auto dict = make_dict(dir);
  write_stereo(dir / "src.wav", 5);
  const auto r = run(dir, "serve --port 0 -d " + dict + " --source " +
                              (dir / "src.wav").string() + " --duration 0.3");
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("listening on ws://127.0.0.1:") != std::string::npos);
  REQUIRE(r.out.find("frames ") != std::string::npos);
}
