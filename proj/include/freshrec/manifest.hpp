#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace freshrec {

// Streaming FNV-1a 64 over a file's bytes, rendered as 16 hex digits.
std::string checksum_file(const std::string& path);

// Reproducibility record written beside every command's outputs. Artifact
// paths are relative to the manifest's directory.
struct RunManifest {
  std::string version;
  std::string command;
  std::string config;  // relative path of the config used, or "-"
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name, checksum
};

void add_artifact(RunManifest& manifest, const std::string& dir,
                  const std::string& name);

void write_manifest(const std::string& dir, const RunManifest& manifest);
RunManifest load_manifest(const std::string& dir);

// Recomputes every artifact checksum; Error on a missing or altered file.
void verify_manifest(const std::string& dir);

}  // namespace freshrec
