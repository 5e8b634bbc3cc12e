#pragma once

#include <filesystem>
#include <string>

// Fresh scratch directory under the system temp dir, removed on scope exit.
struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir(const std::string &name)
      : path(std::filesystem::temp_directory_path() / ("sheforge_test_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string &name) const { return (path / name).string(); }
};

inline std::string table1_path() { return std::string(SHEFORGE_DATA_DIR) + "/table1.csv"; }
