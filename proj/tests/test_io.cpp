#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ntfdm/io.hpp"

using namespace ntfdm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("ntfdm_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

void put(std::string& s, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Minimal PCM WAV writer used as an independent fixture.
std::string pcm_wav(std::uint16_t channels, std::uint32_t rate, std::uint16_t bits, const std::vector<std::int32_t>& frames) {
  std::string data;
  for (std::int32_t v : frames) put(data, static_cast<std::uint32_t>(v), bits / 8);
  std::string s = "RIFF";
  put(s, 36 + static_cast<std::uint32_t>(data.size()), 4);
  s += "WAVEfmt ";
  put(s, 16, 4);
  put(s, 1, 2);
  put(s, channels, 2);
  put(s, rate, 4);
  put(s, rate * channels * bits / 8, 4);
  put(s, channels * bits / 8, 2);
  put(s, bits, 2);
  s += "LIST";  // unknown chunk to skip
  put(s, 3, 4);
  s += std::string("abc\0", 4);  // odd size plus pad byte
  s += "data";
  put(s, static_cast<std::uint32_t>(data.size()), 4);
  return s + data;
}

Signal random_signal(std::size_t n, double rate) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g;
  Signal s{std::vector<double>(n), rate};
  for (double& v : s.samples) v = g(rng);
  return s;
}

}  // namespace

TEST(Io, FormatNames) {
  EXPECT_EQ(io::parse_format("csv"), io::Format::csv);
  EXPECT_EQ(io::parse_format("raw"), io::Format::f32le);
  EXPECT_EQ(io::format_name(io::Format::wav), "wav");
  EXPECT_THROW(io::parse_format("mp3"), ParameterError);
}

TEST(Io, CsvRoundTripIsExact) {
  const fs::path p = temp_dir() / "a.csv";
  const Signal s = random_signal(500, 1234.5);
  io::write_csv(p.string(), s.samples);
  const Signal back = io::read_csv(p.string(), 1234.5);
  EXPECT_EQ(back.samples, s.samples);
  EXPECT_EQ(back.sample_rate, 1234.5);
}

TEST(Io, CsvSkipsBlankLinesAndReportsBadLine) {
  const fs::path p = temp_dir() / "b.csv";
  write_text(p, "1.5\n\n  -2\r\n3e-1\n");
  EXPECT_EQ(io::read_csv(p.string(), 10.0).samples, (std::vector<double>{1.5, -2.0, 0.3}));
  write_text(p, "1\n2\nabc\n");
  try {
    io::read_csv(p.string(), 10.0);
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::read_csv(p.string(), std::nullopt), IngestionError);
  write_text(p, "\n\n");
  EXPECT_THROW(io::read_csv(p.string(), 10.0), IngestionError);
}

TEST(Io, F32RoundTripAtFloatPrecision) {
  const fs::path p = temp_dir() / "c.f32";
  const Signal s = random_signal(300, 8000.0);
  io::write_f32le(p.string(), s.samples);
  EXPECT_EQ(fs::file_size(p), 1200u);
  const Signal back = io::read_f32le(p.string(), 8000.0);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back.samples[i], static_cast<double>(static_cast<float>(s.samples[i])));
}

TEST(Io, F32RejectsTruncatedFile) {
  const fs::path p = temp_dir() / "d.f32";
  write_text(p, std::string(10, '\0'));
  try {
    io::read_f32le(p.string(), 100.0);
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 8"), std::string::npos) << e.what();
  }
}

TEST(Io, WavFloatRoundTrip) {
  const fs::path p = temp_dir() / "e.wav";
  const Signal s = random_signal(1000, 25000.0);
  io::write_wav(p.string(), s);
  const Signal back = io::read_wav(p.string());
  EXPECT_EQ(back.sample_rate, 25000.0);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back.samples[i], static_cast<double>(static_cast<float>(s.samples[i])));
  EXPECT_THROW(io::write_wav(p.string(), Signal{{1.0}, 100.5}), ParameterError);
}

TEST(Io, WavPcm16StereoReadsFirstChannel) {
  const fs::path p = temp_dir() / "f.wav";
  write_text(p, pcm_wav(2, 8000, 16, {16384, 1, -32768, 2, 0, 3}));
  const Signal s = io::read_wav(p.string());
  EXPECT_EQ(s.sample_rate, 8000.0);
  EXPECT_EQ(s.samples, (std::vector<double>{0.5, -1.0, 0.0}));
}

TEST(Io, WavPcm24) {
  const fs::path p = temp_dir() / "g.wav";
  write_text(p, pcm_wav(1, 1000, 24, {0x400000, -0x800000 & 0xFFFFFF, 0x7FFFFF}));
  const Signal s = io::read_wav(p.string());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.samples[0], 0.5);
  EXPECT_EQ(s.samples[1], -1.0);
  EXPECT_NEAR(s.samples[2], 1.0, 1.2e-7);
}

TEST(Io, WavErrorsCarryOffsets) {
  const fs::path p = temp_dir() / "h.wav";
  write_text(p, "RIFX0000WAVE");
  EXPECT_THROW(io::read_wav(p.string()), IngestionError);
  std::string w = pcm_wav(1, 8000, 16, {1, 2});
  w[20] = 2;  // ADPCM tag
  write_text(p, w);
  try {
    io::read_wav(p.string());
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::read_wav((temp_dir() / "missing.wav").string()), IngestionError);
}

TEST(Io, IngestChecksWavRate) {
  const fs::path p = temp_dir() / "i.wav";
  io::write_wav(p.string(), Signal{{0.1, 0.2}, 8000.0});
  EXPECT_EQ(io::ingest(p.string(), io::Format::wav, std::nullopt).sample_rate, 8000.0);
  EXPECT_EQ(io::ingest(p.string(), io::Format::wav, 8000.0).size(), 2u);
  EXPECT_THROW(io::ingest(p.string(), io::Format::wav, 16000.0), IngestionError);
}

TEST(Io, ColumnsAndMatrix) {
  const fs::path p = temp_dir() / "j.csv";
  io::write_columns(p.string(), "x,y", std::vector<double>{1, 2}, std::vector<double>{0.5, 0.25});
  std::ifstream in(p);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all, "x,y\n1,0.5\n2,0.25\n");
  EXPECT_THROW(io::write_columns(p.string(), "x", std::vector<double>{1}, std::vector<double>{}), SizeError);
  Matrix m(2, 2);
  m(0, 1) = 3;
  m(1, 0) = -1;
  io::write_matrix(p.string(), m);
  std::ifstream in2(p);
  std::string mat((std::istreambuf_iterator<char>(in2)), {});
  EXPECT_EQ(mat, "0,3\n-1,0\n");
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}
