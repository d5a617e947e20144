#pragma once

// Signal files (CSV, WAV, raw float32 little-endian) and plot-ready CSV output.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ntfdm/array.hpp"
#include "ntfdm/errors.hpp"
#include "ntfdm/signal.hpp"

namespace ntfdm::io {

enum class Format { csv, wav, f32le };

inline Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "wav") return Format::wav;
  if (name == "f32le" || name == "raw") return Format::f32le;
  throw ParameterError("unknown signal format '" + std::string(name) + "' (expected csv, wav or f32le)");
}

inline std::string format_name(Format f) {
  switch (f) {
    case Format::csv: return "csv";
    case Format::wav: return "wav";
    case Format::f32le: return "f32le";
  }
  return "?";
}

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path + ": cannot open file");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IngestionError(path + ": read error");
  return bytes;
}

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline float le_float(const unsigned char* p) { return std::bit_cast<float>(le32(p)); }

inline void put32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}
inline void put16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double require_rate(const std::optional<double>& rate, const std::string& path) {
  if (!rate) throw IngestionError(path + ": a sample rate is required for this format");
  if (!(*rate > 0.0) || !std::isfinite(*rate)) throw IngestionError(path + ": sample rate must be positive");
  return *rate;
}

inline void check_nonempty(const Signal& s, const std::string& path) {
  if (s.samples.empty()) throw IngestionError(path + ": no samples");
}

}  // namespace detail

/// One sample per line; blank lines are skipped.
inline Signal read_csv(const std::string& path, std::optional<double> sample_rate) {
  const double rate = detail::require_rate(sample_rate, path);
  std::ifstream in(path);
  if (!in) throw IngestionError(path + ": cannot open file");
  Signal s{{}, rate};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = detail::trim(line);
    if (field.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
      throw IngestionError(path + ":" + std::to_string(line_no) + ": not a finite number: '" +
                           std::string(field) + "'");
    }
    s.samples.push_back(v);
  }
  detail::check_nonempty(s, path);
  return s;
}

inline Signal read_f32le(const std::string& path, std::optional<double> sample_rate) {
  const double rate = detail::require_rate(sample_rate, path);
  const auto bytes = detail::read_bytes(path);
  if (bytes.size() % 4 != 0) {
    throw IngestionError(path + ": size " + std::to_string(bytes.size()) +
                         " is not a multiple of 4 (trailing bytes at offset " +
                         std::to_string(bytes.size() - bytes.size() % 4) + ")");
  }
  Signal s{std::vector<double>(bytes.size() / 4), rate};
  for (std::size_t n = 0; n < s.samples.size(); ++n) {
    const float v = detail::le_float(bytes.data() + 4 * n);
    if (!std::isfinite(v)) throw IngestionError(path + ": non-finite sample at offset " + std::to_string(4 * n));
    s.samples[n] = v;
  }
  detail::check_nonempty(s, path);
  return s;
}

/// RIFF/WAVE with PCM 16/24/32-bit integer or 32-bit float data. Only the first
/// channel is read; integer PCM is scaled to [-1, 1).
inline Signal read_wav(const std::string& path) {
  const auto b = detail::read_bytes(path);
  auto fail = [&](std::size_t offset, const std::string& what) -> IngestionError {
    return IngestionError(path + ": offset " + std::to_string(offset) + ": " + what);
  };
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw fail(0, "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string_view id(reinterpret_cast<const char*>(b.data() + pos), 4);
    const std::size_t size = detail::le32(b.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > b.size()) throw fail(pos, "truncated fmt chunk");
      format = detail::le16(b.data() + body);
      channels = detail::le16(b.data() + body + 2);
      rate = detail::le32(b.data() + body + 4);
      block_align = detail::le16(b.data() + body + 12);
      bits = detail::le16(b.data() + body + 14);
      if (format == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE: subformat GUID starts with the tag
        if (size < 40) throw fail(pos, "truncated extensible fmt chunk");
        format = detail::le16(b.data() + body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw fail(pos, "data chunk before fmt chunk");
      const bool pcm = format == 1 && (bits == 16 || bits == 24 || bits == 32);
      const bool flt = format == 3 && bits == 32;
      if (!pcm && !flt) {
        throw fail(pos, "unsupported sample format (tag " + std::to_string(format) + ", " +
                            std::to_string(bits) + " bits)");
      }
      if (channels == 0 || block_align < channels * (bits / 8)) throw fail(pos, "inconsistent block alignment");
      if (rate == 0) throw fail(pos, "sample rate is zero");
      const std::size_t avail = std::min(size, b.size() - body);
      const std::size_t frames = avail / block_align;
      Signal s{std::vector<double>(frames), static_cast<double>(rate)};
      const double scale = std::ldexp(1.0, -(bits - 1));
      for (std::size_t n = 0; n < frames; ++n) {
        const unsigned char* p = b.data() + body + n * block_align;
        double v = 0.0;
        if (flt) {
          v = detail::le_float(p);
          if (!std::isfinite(v)) throw fail(body + n * block_align, "non-finite sample");
        } else if (bits == 16) {
          v = static_cast<std::int16_t>(detail::le16(p)) * scale;
        } else if (bits == 24) {
          std::int32_t x = p[0] | p[1] << 8 | p[2] << 16;
          if (x & 0x800000) x -= 0x1000000;
          v = x * scale;
        } else {
          v = static_cast<std::int32_t>(detail::le32(p)) * scale;
        }
        s.samples[n] = v;
      }
      detail::check_nonempty(s, path);
      return s;
    }
    pos = body + size + (size & 1);
  }
  throw fail(pos, have_fmt ? "no data chunk" : "no fmt chunk");
}

/// Reads a signal; `sample_rate` is required for CSV and raw input and must
/// agree with the header (or be absent) for WAV.
inline Signal ingest(const std::string& path, Format format, std::optional<double> sample_rate) {
  switch (format) {
    case Format::csv: return read_csv(path, sample_rate);
    case Format::f32le: return read_f32le(path, sample_rate);
    case Format::wav: {
      Signal s = read_wav(path);
      if (sample_rate && *sample_rate != s.sample_rate) {
        throw IngestionError(path + ": header sample rate " + std::to_string(s.sample_rate) +
                             " differs from the requested " + std::to_string(*sample_rate));
      }
      return s;
    }
  }
  throw ParameterError("unknown format");
}

/// "%.17g": round-trips every double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ParameterError(path + ": cannot open for writing");
  return out;
}

inline void write_csv(const std::string& path, std::span<const double> samples) {
  auto out = open_output(path);
  for (double v : samples) out << format_double(v) << '\n';
}

inline void write_f32le(const std::string& path, std::span<const double> samples) {
  auto out = open_output(path, true);
  for (double v : samples) detail::put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

/// Mono 32-bit IEEE float WAV.
inline void write_wav(const std::string& path, const Signal& signal) {
  if (!(signal.sample_rate > 0.0) || signal.sample_rate > 4294967295.0 ||
      signal.sample_rate != std::floor(signal.sample_rate))
    throw ParameterError(path + ": WAV needs a positive integer sample rate");
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 4);
  const auto rate = static_cast<std::uint32_t>(signal.sample_rate);
  auto out = open_output(path, true);
  out.write("RIFF", 4);
  detail::put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  detail::put32(out, 16);
  detail::put16(out, 3);  // IEEE float
  detail::put16(out, 1);
  detail::put32(out, rate);
  detail::put32(out, rate * 4);
  detail::put16(out, 4);
  detail::put16(out, 32);
  out.write("data", 4);
  detail::put32(out, data_bytes);
  for (double v : signal.samples) detail::put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

inline void write_signal(const std::string& path, Format format, const Signal& signal) {
  switch (format) {
    case Format::csv: write_csv(path, signal.samples); break;
    case Format::f32le: write_f32le(path, signal.samples); break;
    case Format::wav: write_wav(path, signal); break;
  }
}

/// Two columns with a header line.
inline void write_columns(const std::string& path, std::string_view header, std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() != y.size()) throw SizeError(path + ": column lengths differ");
  auto out = open_output(path);
  out << header << '\n';
  for (std::size_t n = 0; n < x.size(); ++n) out << format_double(x[n]) << ',' << format_double(y[n]) << '\n';
}

/// Comma-separated rows, no header.
inline void write_matrix(const std::string& path, const Matrix& m) {
  auto out = open_output(path);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace ntfdm::io
