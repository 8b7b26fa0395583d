#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ilsel/csv.hpp"
#include "ilsel/data.hpp"

namespace ilsel::jsonl {

// Demonstrations: one episode object per line.
void append_episode(std::string& out, const Episode& ep);
Episode parse_episode(std::string_view line, std::size_t line_no);

void write_demos(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_demos(const std::filesystem::path& path);

void write_env_meta(const std::filesystem::path& path, const EnvMeta& meta);
EnvMeta read_env_meta(const std::filesystem::path& path);

// Evaluation bundles: one bundle object per line, rollout episodes inline.
void append_bundle(std::string& out, const EvalBundle& bundle);
EvalBundle parse_bundle(std::string_view line, std::size_t line_no);

// Streams every line of a JSONL file; `fn(line, line_no)` with 1-based line
// numbers. Blank lines are skipped.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

std::vector<EvalBundle> read_bundles(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::uint64_t bytes = 0;
  std::uint64_t fnv1a64 = 0;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace ilsel::jsonl
