#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcc::fixtures {

/// Scripted construction of small git repositories with pinned author and
/// committer dates, so commit hashes are reproducible.
class GitBuilder {
public:
    explicit GitBuilder(std::filesystem::path dir, const std::string& branch = "main");

    void write(const std::string& file, const std::string& content);
    void remove(const std::string& file);

    /// Stages everything and commits; returns the new sha.
    std::string commit(const std::string& author, const std::string& email, std::int64_t ts,
                       const std::string& message);

    void checkout(const std::string& branch, bool create = false);

    /// No-fast-forward merge of `branch` into the current branch.
    std::string merge(const std::string& branch, const std::string& author, const std::string& email, std::int64_t ts);

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::string git(const std::vector<std::string>& args, const std::string& author = "fixture",
                    const std::string& email = "fixture@example.org", std::int64_t ts = 1);

    std::filesystem::path dir_;
};

}  // namespace pcc::fixtures
