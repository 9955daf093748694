#include "core/errors.hpp"
#include "core/tags.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

using namespace spsim;
namespace fs = std::filesystem;

namespace {

TimeTagStream random_stream(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  TimeTagStream s;
  std::uint64_t t1 = 0, t2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t1 += gen() % 100000;
    t2 += gen() % 100000;
    s.ch1.push_back(t1);
    s.ch2.push_back(t2);
  }
  s.duration_ps = std::max(t1, t2);
  return s;
}

std::string error_of(std::string_view bytes) {
  try {
    decode_tags(bytes);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spsim_tags_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("binary layout of a two-record file") {
  TimeTagStream s;
  s.ch1 = {0x0102030405060708ULL};
  s.ch2 = {0x0102030405060709ULL};
  const auto bytes = encode_tags(s, TagFormat::Binary);
  std::string expect = "PTAG";
  expect += std::string("\x01\x00", 2);
  expect += std::string("\x02\x00\x00\x00\x00\x00\x00\x00", 8);
  expect += std::string("\x01\0\0\0\0\0\0\0\x08\x07\x06\x05\x04\x03\x02\x01", 16);
  expect += std::string("\x02\0\0\0\0\0\0\0\x09\x07\x06\x05\x04\x03\x02\x01", 16);
  CHECK(bytes == expect);
  CHECK(bytes.size() == kTagHeaderBytes + 2 * kTagRecordBytes);
}

TEST_CASE("csv layout") {
  TimeTagStream s;
  s.ch1 = {5, 10};
  s.ch2 = {7};
  CHECK(encode_tags(s, TagFormat::Csv) == "channel,timestamp_ps\n1,5\n2,7\n1,10\n");
}

TEST_CASE("round trips through both formats") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = random_stream(seed, 1 + seed * 37);
    for (auto f : {TagFormat::Binary, TagFormat::Csv}) {
      auto back = decode_tags(encode_tags(s, f));
      back.duration_ps = s.duration_ps;
      CHECK(back == s);
    }
  }
  TimeTagStream empty;
  CHECK(decode_tags(encode_tags(empty, TagFormat::Binary)).size() == 0);
  CHECK(decode_tags(encode_tags(empty, TagFormat::Csv)).size() == 0);
}

TEST_CASE("ties are merged with channel 1 first") {
  TimeTagStream s;
  s.ch1 = {5};
  s.ch2 = {5};
  const auto r = merged_records(s);
  REQUIRE(r.size() == 2);
  CHECK(r[0].channel == 1);
  CHECK(r[1].channel == 2);
}

TEST_CASE("malformed binary input names the byte offset") {
  TimeTagStream s;
  s.ch1 = {1, 2};
  s.ch2 = {3};
  const auto good = encode_tags(s, TagFormat::Binary);

  CHECK(error_of(good.substr(0, 10)).starts_with("byte 10: "));
  CHECK(error_of(good.substr(0, good.size() - 3)).starts_with("byte 46: "));
  CHECK(error_of(good + "x").starts_with("byte 62: "));

  auto bad_version = good;
  bad_version[4] = 9;
  CHECK(error_of(bad_version).starts_with("byte 4: "));

  auto bad_channel = good;
  bad_channel[kTagHeaderBytes + kTagRecordBytes] = 3;
  CHECK(error_of(bad_channel).starts_with("byte 30: "));

  auto bad_reserved = good;
  bad_reserved[kTagHeaderBytes + 5] = 1;
  CHECK(error_of(bad_reserved).starts_with("byte 19: "));
}

TEST_CASE("out-of-order records are rejected") {
  CHECK(error_of("channel,timestamp_ps\n1,10\n1,5\n").starts_with("byte 26: "));
  TimeTagStream s;
  s.ch1 = {10, 5};
  CHECK_THROWS_AS(s.validate(), DataError);
  s.ch1 = {5, 10};
  s.duration_ps = 7;
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("malformed csv") {
  CHECK(error_of("").starts_with("byte 0: "));
  CHECK(error_of("time,channel\n").starts_with("byte 0: "));
  CHECK(error_of("channel,timestamp_ps\n1,abc\n").starts_with("byte 21: "));
  CHECK(error_of("channel,timestamp_ps\n3,1\n").starts_with("byte 21: "));
}

TEST_CASE("files and sidecars") {
  TempDir dir;
  auto s = random_stream(3, 500);
  s.duration_ps += 12345;
  for (auto f : {TagFormat::Binary, TagFormat::Csv}) {
    const auto path = dir.path / (f == TagFormat::Binary ? "a.ptag" : "a.csv");
    write_tags(s, path, f, 42, "seed = 42\n");
    CHECK(fs::exists(sidecar_path(path)));
    CHECK(read_tags(path) == s);
    fs::remove(sidecar_path(path));
    // without a sidecar the acquisition ends at the last tag
    CHECK(read_tags(path).duration_ps == s.duration_ps - 12345);
  }
  CHECK_THROWS_AS(read_tags(dir.path / "missing.ptag"), IoError);
}

TEST_CASE("atomic write leaves no temporary file") {
  TempDir dir;
  write_file_atomic(dir.path / "x.txt", "hello");
  write_file_atomic(dir.path / "x.txt", "world");
  CHECK(read_file(dir.path / "x.txt") == "world");
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);
}
