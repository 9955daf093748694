#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spsim {

/// Two-channel photon detection record. Timestamps are integer picoseconds
/// since acquisition start, kept per channel in nondecreasing order.
struct TimeTagStream {
  std::vector<std::uint64_t> ch1;
  std::vector<std::uint64_t> ch2;
  std::uint64_t duration_ps = 0;

  double duration() const { return static_cast<double>(duration_ps) * 1e-12; }
  const std::vector<std::uint64_t>& channel(int c) const;
  std::size_t size() const { return ch1.size() + ch2.size(); }
  /// Mean count rate of channel 1 or 2 over the acquisition, s^-1.
  double rate(int c) const;

  /// Throws DataError when a channel is out of order or a timestamp exceeds
  /// the acquisition duration.
  void validate() const;

  bool operator==(const TimeTagStream&) const = default;
};

struct TagRecord {
  std::uint8_t channel = 0;
  std::uint64_t timestamp_ps = 0;
};

/// Both channels merged by timestamp; ties go to the lower channel first.
std::vector<TagRecord> merged_records(const TimeTagStream& stream);

enum class TagFormat { Binary, Csv };

// Binary layout, all little-endian:
//   "PTAG" | u16 version | u64 record count |
//   records of { u8 channel | 7 zero bytes | u64 timestamp_ps }
inline constexpr std::uint16_t kTagFormatVersion = 1;
inline constexpr std::size_t kTagHeaderBytes = 14;
inline constexpr std::size_t kTagRecordBytes = 16;

std::string encode_tags(const TimeTagStream& stream, TagFormat format);

/// Parses either format (binary recognised by its magic). Errors name the byte
/// offset of the offending header field, record or line. The duration is left
/// at the last timestamp; callers with a sidecar override it.
TimeTagStream decode_tags(std::string_view bytes);

/// Writes `bytes` to a temporary file next to `path` and renames it in place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// "<tags>.meta": key = value lines with duration_ps, counts, rates, seed,
/// followed by the configuration echo under a "config." prefix.
std::filesystem::path sidecar_path(const std::filesystem::path& tags_path);

void write_tags(const TimeTagStream& stream, const std::filesystem::path& path, TagFormat format,
                std::uint64_t seed = 0, std::string_view config_echo = {});

/// Reads a tag file and, when present, its sidecar for the acquisition time.
TimeTagStream read_tags(const std::filesystem::path& path);

} // namespace spsim
