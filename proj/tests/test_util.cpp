#include <atomic>
#include <stdexcept>
#include <vector>

#include "glomdet/util.hpp"
#include "test_support.hpp"

using namespace glomdet;

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e6) == "1000000");
  double back = 0.0;
  const double v = 0.9791666666666666;
  REQUIRE(parse_double(format_double(v), back));
  CHECK(back == v);
}

TEST_CASE("parse helpers reject trailing junk") {
  double d = 0.0;
  std::int64_t i = 0;
  CHECK_FALSE(parse_double("1.5x", d));
  CHECK_FALSE(parse_double("", d));
  CHECK(parse_int64("-42", i));
  CHECK(i == -42);
  CHECK_FALSE(parse_int64("4.2", i));
}

TEST_CASE("text files round-trip and report missing input") {
  test::TempDir dir("util");
  write_text_file(dir / "a.txt", "hello\n");
  CHECK(read_text_file(dir / "a.txt") == "hello\n");
  CHECK_ERROR_CODE(read_text_file(dir / "missing.txt"), ErrorCode::kUnreadableFile);
  CHECK_ERROR_CODE(write_text_file(dir / "no/such/dir/x.txt", "x"), ErrorCode::kIoError);
}

TEST_CASE("file_fingerprint depends on content only") {
  test::TempDir dir("fp");
  write_text_file(dir / "a", "abc");
  write_text_file(dir / "b", "abc");
  write_text_file(dir / "c", "abd");
  CHECK(file_fingerprint(dir / "a") == file_fingerprint(dir / "b"));
  CHECK(file_fingerprint(dir / "a") != file_fingerprint(dir / "c"));
  CHECK(file_fingerprint(dir / "a").size() == 16);
}

TEST_CASE("parallel_for visits every index once") {
  for (unsigned workers : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  for (unsigned workers : {1u, 4u}) {
    try {
      parallel_for(50, workers, [](std::size_t i) {
        if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
      });
      FAIL("no exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "7");
    }
  }
}
