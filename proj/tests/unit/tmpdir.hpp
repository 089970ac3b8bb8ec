#pragma once

#include <filesystem>
#include <fstream>
#include <string>

inline std::filesystem::path test_tmp(const std::string& name) {
  const auto dir = std::filesystem::path(C3BV_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}
