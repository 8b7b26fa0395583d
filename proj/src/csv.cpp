#include "ilsel/csv.hpp"

#include <cstdint>
#include <stdexcept>
#include <system_error>

namespace ilsel {

std::string f64_csv(double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string f64_shortest(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_f64(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_f64: bad float '" + std::string(s) + "'");
  return x;
}

long long parse_i64(std::string_view s) {
  long long x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_i64: bad integer '" + std::string(s) + "'");
  return x;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

AtomicFile::AtomicFile(const std::filesystem::path& path)
    : final_path_(path), partial_path_(path.string() + ".partial") {
  out_.open(partial_path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open for writing: " + partial_path_.string());
}

AtomicFile::~AtomicFile() {
  if (!committed_ && out_.is_open()) out_.close();
}

void AtomicFile::write(std::string_view bytes) {
  out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  for (unsigned char c : bytes) {
    hash_ ^= c;
    hash_ *= 0x100000001b3ULL;
  }
  bytes_ += bytes.size();
}

void AtomicFile::commit() {
  out_.close();
  if (!out_) throw std::runtime_error("write failed: " + partial_path_.string());
  std::filesystem::rename(partial_path_, final_path_);
  committed_ = true;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::invalid_argument("csv: no column named '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path.string());
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw std::runtime_error("csv: row with " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(t.header.size()) + " in " +
                               path.string());
    t.rows.push_back(std::move(fields));
  }
  return t;
}

}  // namespace ilsel
