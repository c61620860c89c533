#include "freshrec/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "freshrec/error.hpp"
#include "freshrec/strings.hpp"
#include "freshrec/version.hpp"

namespace freshrec {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

constexpr const char* kManifestFile = "manifest.txt";

}  // namespace

std::string checksum_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "' for checksum");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void add_artifact(RunManifest& manifest, const std::string& dir,
                  const std::string& name) {
  manifest.artifacts.emplace_back(name, checksum_file(join_path(dir, name)));
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  const std::string path = join_path(dir, kManifestFile);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "version=" << (manifest.version.empty() ? std::string(kVersion)
                                                 : manifest.version)
      << '\n'
      << "command=" << manifest.command << '\n'
      << "config=" << (manifest.config.empty() ? "-" : manifest.config) << '\n'
      << "seed=" << manifest.seed << '\n';
  for (const auto& [name, checksum] : manifest.artifacts) {
    out << "artifact=" << name << " fnv1a64=" << checksum << '\n';
  }
  if (!out.flush()) fail("failed writing manifest to '" + path + "'");
}

RunManifest load_manifest(const std::string& dir) {
  const std::string path = join_path(dir, kManifestFile);
  std::ifstream in(path);
  if (!in) fail("cannot open manifest '" + path + "'");
  RunManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "version") manifest.version = value;
    else if (key == "command") manifest.command = value;
    else if (key == "config") manifest.config = value;
    else if (key == "seed") manifest.seed = static_cast<std::uint64_t>(parse_i64(value, "seed"));
    else if (key == "artifact") {
      const std::size_t sep = value.find(" fnv1a64=");
      if (sep == std::string::npos) {
        fail("'" + path + "' line " + std::to_string(line_no) + ": malformed artifact");
      }
      manifest.artifacts.emplace_back(value.substr(0, sep), value.substr(sep + 9));
    } else {
      fail("'" + path + "' line " + std::to_string(line_no) +
           ": unknown manifest key '" + key + "'");
    }
  }
  return manifest;
}

void verify_manifest(const std::string& dir) {
  const RunManifest manifest = load_manifest(dir);
  for (const auto& [name, recorded] : manifest.artifacts) {
    const std::string actual = checksum_file(join_path(dir, name));
    if (actual != recorded) {
      fail("artifact '" + name + "' checksum mismatch: manifest " + recorded +
           ", file " + actual);
    }
  }
}

}  // namespace freshrec
