#pragma once

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "glomdet/errors.hpp"

// Checks that `expr` throws glomdet::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected_code)                               \
  do {                                                                      \
    bool glomdet_thrown_ = false;                                           \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const glomdet::Error& glomdet_e_) {                            \
      glomdet_thrown_ = true;                                               \
      CHECK_MESSAGE(glomdet_e_.code() == (expected_code), glomdet_e_.what()); \
    }                                                                       \
    CHECK_MESSAGE(glomdet_thrown_, "expected glomdet::Error from " #expr);  \
  } while (0)

namespace test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("glomdet_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(GLOMDET_GOLDEN_DIR) / name;
}

}  // namespace test
