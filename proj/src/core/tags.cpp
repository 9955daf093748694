#include "core/tags.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace spsim {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'A', 'G'};
constexpr std::string_view kCsvHeader = "channel,timestamp_ps";

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(std::string_view in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::string at_byte(std::size_t offset) { return "byte " + std::to_string(offset) + ": "; }

void append(TimeTagStream& s, unsigned channel, std::uint64_t ts, std::size_t offset) {
  auto& v = channel == 1 ? s.ch1 : s.ch2;
  if (!v.empty() && ts < v.back())
    throw DataError(at_byte(offset) + "channel " + std::to_string(channel) + " timestamp " +
                    std::to_string(ts) + " ps precedes " + std::to_string(v.back()) +
                    " ps; per-channel order is required");
  v.push_back(ts);
}

TimeTagStream decode_binary(std::string_view in) {
  if (in.size() < kTagHeaderBytes) throw DataError(at_byte(in.size()) + "truncated header");
  const auto version = get_le(in, 4, 2);
  if (version != kTagFormatVersion)
    throw DataError(at_byte(4) + "unsupported format version " + std::to_string(version));
  const auto count = get_le(in, 6, 8);
  const std::size_t body = in.size() - kTagHeaderBytes;
  if (count > body / kTagRecordBytes) {
    const auto complete = body / kTagRecordBytes;
    throw DataError(at_byte(kTagHeaderBytes + complete * kTagRecordBytes) + "truncated record " +
                    std::to_string(complete) + " of " + std::to_string(count));
  }
  if (body != count * kTagRecordBytes)
    throw DataError(at_byte(kTagHeaderBytes + count * kTagRecordBytes) + "trailing bytes after " +
                    std::to_string(count) + " records");

  TimeTagStream s;
  std::uint64_t last = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = kTagHeaderBytes + i * kTagRecordBytes;
    const auto channel = static_cast<unsigned char>(in[at]);
    if (channel != 1 && channel != 2)
      throw DataError(at_byte(at) + "record " + std::to_string(i) + " has channel " +
                      std::to_string(channel) + ", expected 1 or 2");
    for (std::size_t r = 1; r < 8; ++r)
      if (in[at + r] != 0)
        throw DataError(at_byte(at + r) + "record " + std::to_string(i) + " reserved byte is not zero");
    const auto ts = get_le(in, at + 8, 8);
    append(s, channel, ts, at);
    last = std::max(last, ts);
  }
  s.duration_ps = last;
  return s;
}

TimeTagStream decode_csv(std::string_view in) {
  TimeTagStream s;
  std::size_t pos = 0;
  bool header = true;
  std::uint64_t last = 0;
  while (pos < in.size()) {
    auto end = in.find('\n', pos);
    if (end == std::string_view::npos) end = in.size();
    const auto line = text::trim(in.substr(pos, end - pos));
    if (header) {
      if (line != kCsvHeader)
        throw DataError(at_byte(pos) + "expected header '" + std::string(kCsvHeader) + "'");
      header = false;
    } else if (!line.empty()) {
      const auto comma = line.find(',');
      unsigned long long channel = 0;
      unsigned long long ts = 0;
      if (comma == std::string_view::npos || !text::parse_u64(line.substr(0, comma), channel) ||
          !text::parse_u64(line.substr(comma + 1), ts))
        throw DataError(at_byte(pos) + "malformed record '" + std::string(line) + "'");
      if (channel != 1 && channel != 2)
        throw DataError(at_byte(pos) + "channel " + std::to_string(channel) + ", expected 1 or 2");
      append(s, static_cast<unsigned>(channel), ts, pos);
      last = std::max<std::uint64_t>(last, ts);
    }
    pos = end + 1;
  }
  if (header) throw DataError(at_byte(0) + "empty file, header line is mandatory");
  s.duration_ps = last;
  return s;
}

} // namespace

const std::vector<std::uint64_t>& TimeTagStream::channel(int c) const {
  if (c == 1) return ch1;
  if (c == 2) return ch2;
  throw DomainError("channel must be 1 or 2");
}

double TimeTagStream::rate(int c) const {
  if (duration_ps == 0) return 0.0;
  return static_cast<double>(channel(c).size()) / duration();
}

void TimeTagStream::validate() const {
  for (int c = 1; c <= 2; ++c) {
    const auto& v = channel(c);
    if (!std::is_sorted(v.begin(), v.end()))
      throw DataError("channel " + std::to_string(c) + " timestamps are not in order");
    if (!v.empty() && v.back() > duration_ps)
      throw DataError("channel " + std::to_string(c) + " timestamp beyond acquisition end");
  }
}

std::vector<TagRecord> merged_records(const TimeTagStream& stream) {
  std::vector<TagRecord> out;
  out.reserve(stream.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < stream.ch1.size() || j < stream.ch2.size()) {
    if (j == stream.ch2.size() || (i < stream.ch1.size() && stream.ch1[i] <= stream.ch2[j]))
      out.push_back({1, stream.ch1[i++]});
    else
      out.push_back({2, stream.ch2[j++]});
  }
  return out;
}

std::string encode_tags(const TimeTagStream& stream, TagFormat format) {
  const auto records = merged_records(stream);
  std::string out;
  if (format == TagFormat::Binary) {
    out.reserve(kTagHeaderBytes + records.size() * kTagRecordBytes);
    out.append(kMagic, 4);
    put_le(out, kTagFormatVersion, 2);
    put_le(out, records.size(), 8);
    for (const auto& r : records) {
      out.push_back(static_cast<char>(r.channel));
      out.append(7, '\0');
      put_le(out, r.timestamp_ps, 8);
    }
  } else {
    out.reserve(24 + records.size() * 16);
    out.append(kCsvHeader);
    out.push_back('\n');
    for (const auto& r : records) {
      out.append(std::to_string(r.channel));
      out.push_back(',');
      out.append(std::to_string(r.timestamp_ps));
      out.push_back('\n');
    }
  }
  return out;
}

TimeTagStream decode_tags(std::string_view bytes) {
  if (bytes.size() >= 4 && std::equal(kMagic, kMagic + 4, bytes.begin())) return decode_binary(bytes);
  return decode_csv(bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path sidecar_path(const std::filesystem::path& tags_path) {
  auto p = tags_path;
  p += ".meta";
  return p;
}

void write_tags(const TimeTagStream& stream, const std::filesystem::path& path, TagFormat format,
                std::uint64_t seed, std::string_view config_echo) {
  stream.validate();
  std::string meta = "# time-tag acquisition metadata\n";
  meta += "duration_ps = " + std::to_string(stream.duration_ps) + "\n";
  meta += "duration_s = " + text::format_double(stream.duration()) + "\n";
  meta += "count_ch1 = " + std::to_string(stream.ch1.size()) + "\n";
  meta += "count_ch2 = " + std::to_string(stream.ch2.size()) + "\n";
  meta += "rate_ch1_per_s = " + text::format_double(stream.rate(1)) + "\n";
  meta += "rate_ch2_per_s = " + text::format_double(stream.rate(2)) + "\n";
  meta += "seed = " + std::to_string(seed) + "\n";
  for (const auto& kv : text::split_key_values(config_echo))
    meta += "config." + kv.key + " = " + kv.value + "\n";

  write_file_atomic(path, encode_tags(stream, format));
  write_file_atomic(sidecar_path(path), meta);
}

TimeTagStream read_tags(const std::filesystem::path& path) {
  auto stream = decode_tags(read_file(path));
  const auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    const auto meta = text::parse_key_values(read_file(meta_path), meta_path.string());
    if (const auto it = meta.find("duration_ps"); it != meta.end()) {
      unsigned long long d = 0;
      if (!text::parse_u64(it->second, d))
        throw DataError(meta_path.string() + ": malformed duration_ps '" + it->second + "'");
      if (d < stream.duration_ps)
        throw DataError(meta_path.string() + ": duration_ps is shorter than the last timestamp");
      stream.duration_ps = d;
    }
  }
  return stream;
}

} // namespace spsim
