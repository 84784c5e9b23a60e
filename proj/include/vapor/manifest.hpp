#pragma once

// Run manifest written next to CLI outputs: what was run and a SHA-256 of
// every file produced. Contains no timestamps or host data, so identical
// inputs give an identical manifest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vapor {

struct ManifestFile {
  std::string path;  // relative to output_dir
  std::uint64_t bytes = 0;
  std::string sha256;  // lowercase hex
};

struct RunManifest {
  std::string config_path;
  std::string command;
  std::vector<std::string> arguments;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<ManifestFile> files;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Hashes output_dir / relative_path and appends it to the file list.
void record_file(RunManifest& manifest, const std::string& relative_path);

void write_manifest_json(std::ostream& os, const RunManifest& manifest);

}  // namespace vapor
