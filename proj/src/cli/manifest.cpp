// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>

#include "hinrank/cli.hpp"
#include "hinrank/errors.hpp"

namespace hinrank::cli {

std::uint64_t digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), digest_file(path));
}

void RunManifest::write(std::ostream& out) const {
  out << "command = " << command << '\n';
  out << "seed = " << seed << '\n';
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", wall_clock_seconds);
  out << "wall_clock_seconds = " << buf << '\n';
  for (const auto& [path, digest] : inputs) out << "input = " << path << " fnv1a:" << hex_digest(digest) << '\n';
  for (const auto& a : artifacts) out << "artifact = " << a << '\n';
  for (const auto& [k, v] : config.entries()) out << "config." << k << " = " << v << '\n';
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write(out);
}

}  // namespace hinrank::cli
