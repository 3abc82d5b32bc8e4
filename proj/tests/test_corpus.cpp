#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "speechgrade/corpus.hpp"
#include "speechgrade/io.hpp"
#include "speechgrade/rng.hpp"

using namespace speechgrade;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "speechgrade_test";
  std::filesystem::create_directories(dir);
  return dir;
}

const std::string kHeader = "utt_id\tsource\taudio_path\ttranscript\taligned_ref_id\n";

}  // namespace

TEST_CASE("parse_manifest accepts a minimal aligned pair") {
  const std::string content = kHeader +
                              "u1\treal\ta.wav\tరక్తపోటు తనిఖీ\t\n"
                              "u2\tsynth_aligned\tb.wav\tరక్తపోటు తనిఖీ\tu1\n";
  const auto records = parse_manifest(content);
  REQUIRE(records.size() == 2);
  CHECK(records[0].utt_id == "u1");
  CHECK(records[0].source == SourceKind::Real);
  CHECK(records[0].transcript == "రక్తపోటు తనిఖీ");
  CHECK(records[1].source == SourceKind::SyntheticAligned);
  CHECK(records[1].aligned_ref_id == "u1");
}

TEST_CASE("parse_manifest allows forward alignment references") {
  const std::string content = kHeader +
                              "u2\tsynth_aligned\tb.wav\ttext here\tu1\n"
                              "u1\treal\ta.wav\ttext here\t\n";
  CHECK(parse_manifest(content).size() == 2);
}

TEST_CASE("parse_manifest rejects invariant violations") {
  CHECK_THROWS_WITH_AS(
      parse_manifest(kHeader + "u3\tsynth_aligned\tc.wav\ttext\t\n"),
      doctest::Contains("DanglingAlignment"), ValidationError);
  CHECK_THROWS_WITH_AS(
      parse_manifest(kHeader + "u3\tsynth_aligned\tc.wav\ttext\tnope\n"),
      doctest::Contains("DanglingAlignment"), ValidationError);
  // alignment target must be Real
  CHECK_THROWS_WITH_AS(
      parse_manifest(kHeader + "u1\tsynth_unaligned\ta.wav\tt\t\n" +
                     "u2\tsynth_aligned\tb.wav\tt\tu1\n"),
      doctest::Contains("DanglingAlignment"), ValidationError);
  // Real records carry no alignment
  CHECK_THROWS_WITH_AS(
      parse_manifest(kHeader + "u1\treal\ta.wav\tt\t\n" +
                     "u2\treal\tb.wav\tt\tu1\n"),
      doctest::Contains("DanglingAlignment"), ValidationError);
  CHECK_THROWS_WITH_AS(
      parse_manifest(kHeader + "u1\treal\ta.wav\tt\t\n" + "u1\treal\tb.wav\tt\t\n"),
      doctest::Contains("DuplicateId(u1)"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_manifest(kHeader + "u1\tbogus\ta.wav\tt\t\n"),
                       doctest::Contains("UnknownSource"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_manifest(kHeader + "u1\treal\ta.wav\tt\n"),
                       doctest::Contains("MalformedLine(2)"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_manifest("wrong header\n"),
                       doctest::Contains("MalformedLine(1)"), ValidationError);
  CHECK_THROWS_AS(parse_manifest(""), ValidationError);
}

TEST_CASE("manifest round-trip is byte identical") {
  const std::string content = kHeader +
                              "u1\treal\taudio/a.wav\tఒక వాక్యం\t\n"
                              "u2\tsynth_aligned\taudio/b.wav\tఒక వాక్యం\tu1\n"
                              "u3\tsynth_unaligned\tc.wav\tmore words here\t\n";
  const auto records = parse_manifest(content);
  CHECK(format_manifest(records) == content);

  const auto path = (temp_dir() / "roundtrip.tsv").string();
  write_manifest(records, path);
  const auto loaded = load_manifest(path);
  const auto path2 = (temp_dir() / "roundtrip2.tsv").string();
  write_manifest(loaded, path2);
  CHECK(read_text_file(path) == read_text_file(path2));
  CHECK(read_text_file(path) == content);
}

TEST_CASE("availability_mask mirrors the per-source availability table") {
  CorpusRecord rec;
  rec.source = SourceKind::Real;
  auto m = availability_mask(rec);
  CHECK_FALSE(m.has_sim);
  CHECK_FALSE(m.has_wer);
  CHECK(m.fixed_sim == 1.0);
  CHECK(m.fixed_wer == 1.0);

  rec.source = SourceKind::SyntheticAligned;
  m = availability_mask(rec);
  CHECK(m.has_sim);
  CHECK(m.has_wer);
  CHECK_FALSE(m.fixed_sim.has_value());
  CHECK_FALSE(m.fixed_wer.has_value());

  rec.source = SourceKind::SyntheticUnaligned;
  m = availability_mask(rec);
  CHECK_FALSE(m.has_sim);
  CHECK_FALSE(m.has_wer);
  CHECK(m.fixed_sim == 0.0);
  CHECK(m.fixed_wer == 0.0);
}

TEST_CASE("wav round-trip: silence and full-scale samples") {
  AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(160, 0.0);
  const auto path = (temp_dir() / "silence.wav").string();
  write_wav(clip, path);
  const auto decoded = decode_wav(path);
  CHECK(decoded.sample_rate_hz == 16000);
  REQUIRE(decoded.samples.size() == 160);
  for (const double s : decoded.samples) CHECK(s == 0.0);

  clip.samples = {32767.0 / 32768.0, -1.0, 0.5, -0.25};
  const auto path2 = (temp_dir() / "fullscale.wav").string();
  write_wav(clip, path2);
  const auto d2 = decode_wav(path2);
  REQUIRE(d2.samples.size() == 4);
  CHECK(d2.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
  CHECK(d2.samples[1] == -1.0);
  CHECK(d2.samples[2] == 0.5);
  CHECK(d2.samples[3] == -0.25);
}

TEST_CASE("wav decoder never yields samples outside [-1, 1)") {
  Rng rng(5);
  AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.resize(500);
  for (auto& s : clip.samples) s = rng.uniform(-1.0, 1.0);
  const auto path = (temp_dir() / "random.wav").string();
  write_wav(clip, path);
  for (const double s : decode_wav(path).samples) {
    CHECK(s >= -1.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("wav decoder rejects unsupported inputs") {
  const auto dir = temp_dir();

  AudioClip clip;
  clip.sample_rate_hz = 44100;
  clip.samples.assign(10, 0.1);
  const auto path = (dir / "441.wav").string();
  write_wav(clip, path);
  CHECK_THROWS_WITH_AS(decode_wav(path), doctest::Contains("UnsupportedRate(44100)"),
                       ValidationError);

  const auto garbage = (dir / "garbage.wav").string();
  write_text_file(garbage, "this is not a wav file at all........");
  CHECK_THROWS_WITH_AS(decode_wav(garbage), doctest::Contains("NotRiff"),
                       ValidationError);

  CHECK_THROWS_AS(decode_wav((dir / "missing_file.wav").string()), IoError);

  // truncate a valid file inside the data chunk
  clip.sample_rate_hz = 16000;
  clip.samples.assign(100, 0.2);
  const auto full = (dir / "full.wav").string();
  write_wav(clip, full);
  auto bytes = read_text_file(full);
  bytes.resize(bytes.size() - 50);
  const auto cut = (dir / "cut.wav").string();
  write_text_file(cut, bytes);
  CHECK_THROWS_WITH_AS(decode_wav(cut), doctest::Contains("TruncatedData"),
                       ValidationError);
}

TEST_CASE("wav decoder checks the format tag fields") {
  // hand-build a stereo file header
  std::string bytes;
  auto u32 = [&bytes](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto u16 = [&bytes](std::uint16_t v) {
    bytes.push_back(static_cast<char>(v & 0xFF));
    bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
  };
  bytes += "RIFF";
  u32(36 + 4);
  bytes += "WAVE";
  bytes += "fmt ";
  u32(16);
  u16(1);
  u16(2);  // stereo: unsupported
  u32(16000);
  u32(16000 * 4);
  u16(4);
  u16(16);
  bytes += "data";
  u32(4);
  u32(0);
  const auto path = (temp_dir() / "stereo.wav").string();
  write_text_file(path, bytes);
  CHECK_THROWS_WITH_AS(decode_wav(path), doctest::Contains("channels=2"),
                       ValidationError);
}

TEST_CASE("wav decoder skips unknown chunks") {
  std::string bytes;
  auto u32 = [&bytes](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  auto u16 = [&bytes](std::uint16_t v) {
    bytes.push_back(static_cast<char>(v & 0xFF));
    bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
  };
  bytes += "RIFF";
  u32(0);  // size field unused by the reader
  bytes += "WAVE";
  bytes += "fmt ";
  u32(16);
  u16(1);
  u16(1);
  u32(16000);
  u32(32000);
  u16(2);
  u16(16);
  bytes += "LIST";
  u32(5);
  bytes += "INFOx";
  bytes.push_back('\0');  // odd chunk sizes are padded
  bytes += "data";
  u32(4);
  u16(16384);   // 0.5
  u16(49152);   // -0.5 as uint16
  const auto path = (temp_dir() / "chunky.wav").string();
  write_text_file(path, bytes);
  const auto clip = decode_wav(path);
  REQUIRE(clip.samples.size() == 2);
  CHECK(clip.samples[0] == 0.5);
  CHECK(clip.samples[1] == -0.5);
}
