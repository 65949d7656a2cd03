#ifndef FINEMO_TESTS_SUPPORT_H_
#define FINEMO_TESTS_SUPPORT_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "finemo/lexicons.h"

namespace finemo::test {

inline const LexiconSet& sample_lexicons() {
  static const LexiconSet lx = load_lexicons(FINEMO_LEXICON_DIR);
  return lx;
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(FINEMO_TEST_DATA) / name;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("finemo-" + tag + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace finemo::test

#endif  // FINEMO_TESTS_SUPPORT_H_
