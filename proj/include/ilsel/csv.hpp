#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ilsel {

// 17 significant digits: enough to round-trip any double exactly.
std::string f64_csv(double x);

// Shortest decimal that round-trips exactly (std::to_chars).
std::string f64_shortest(double x);

double parse_f64(std::string_view s);
long long parse_i64(std::string_view s);

std::vector<std::string> split_csv_line(std::string_view line);

// Streams bytes to "<path>.partial" and renames on commit. Abandoned writes
// leave only the quarantine file behind; a valid file at `path` is never
// replaced by a partial one.
class AtomicFile {
 public:
  explicit AtomicFile(const std::filesystem::path& path);
  ~AtomicFile();

  void write(std::string_view bytes);
  void commit();

  std::uint64_t content_hash() const { return hash_; }
  std::uint64_t bytes_written() const { return bytes_; }

 private:
  std::filesystem::path final_path_;
  std::filesystem::path partial_path_;
  std::ofstream out_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
  std::uint64_t bytes_ = 0;
  bool committed_ = false;
};

// FNV-1a over a whole file; used by manifests and reproducibility checks.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ilsel
