#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "numeric/error.hpp"

namespace princ::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("princ_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace princ::testing

#define EXPECT_PRINC_ERROR(stmt, expected_code)                      \
  do {                                                               \
    bool caught_ = false;                                            \
    try {                                                            \
      stmt;                                                          \
    } catch (const ::princ::Error& e_) {                             \
      caught_ = true;                                                \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();              \
    }                                                                \
    EXPECT_TRUE(caught_) << "expected princ::Error from " #stmt;     \
  } while (0)
