// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hinrank/config.hpp"

namespace hinrank::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kLeakageError = 4,
};

/// Runs one subcommand (generate, ingest, graph, train, predict, evaluate,
/// ablate) and maps errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// FNV-1a (64-bit) over the file bytes.
std::uint64_t digest_file(const std::filesystem::path& path);
std::string hex_digest(std::uint64_t digest);

/// Provenance record written next to every produced artifact.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  KeyValueConfig config;
  std::vector<std::pair<std::string, std::uint64_t>> inputs;  // path, digest
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0;

  void add_input(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace hinrank::cli
