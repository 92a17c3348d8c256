#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace pcc::fixtures {

/// Builds the bundled three-repository corpus under `dir`:
///   repos/acme-core, repos/acme-web  organization repositories
///   repos/outside-lib                generic repository
///   config.json                      run configuration with small caps
/// The histories are scripted from a fixed seed, so commit hashes and every
/// downstream output are reproducible.
void build_fixture_corpus(const std::filesystem::path& dir);

/// Every regular file below `dir`, keyed by relative path, with its bytes.
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& dir);

}  // namespace pcc::fixtures
