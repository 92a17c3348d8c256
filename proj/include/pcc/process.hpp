#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pcc {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
};

/// Runs argv[0] (looked up on PATH) with stdout captured and stderr discarded.
/// `env` entries are added to the inherited environment.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::map<std::string, std::string>& env = {},
                          const std::filesystem::path& cwd = {});

}  // namespace pcc
