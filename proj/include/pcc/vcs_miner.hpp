#pragma once

#include "pcc/line_diff.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcc {

struct CommitRecord {
    std::string repo_id;
    std::string sha;
    std::string author_name;
    std::string author_email;
    std::int64_t timestamp = 0;  // UTC seconds, author date
    std::optional<std::string> first_parent_sha;
    std::vector<std::string> changed_java_files;
    std::size_t files_changed_count = 0;

    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

void to_json(nlohmann::json& j, const CommitRecord& c);
void from_json(const nlohmann::json& j, CommitRecord& c);

struct OutlierThreshold {
    double q3 = 0.0;
    double iqr = 0.0;
    double cutoff = 0.0;  // q3 + 1.5 * iqr
};

/// Type-7 (linear interpolation) sample quantile of an ascending sequence.
double quantile_type7(std::span<const double> sorted, double p);

/// A local clone read through the system `git` client.
class GitRepository {
public:
    /// Throws Error(repo_unreadable) if `path` is not a readable repository.
    GitRepository(std::filesystem::path path, std::string repo_id);

    [[nodiscard]] const std::string& id() const noexcept { return repo_id_; }
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

    /// First-parent chain of `branch`, oldest first. Merges are diffed against
    /// their first parent and the root commit against the empty tree. An empty
    /// repository yields no commits; a missing branch throws
    /// Error(branch_missing).
    [[nodiscard]] std::vector<CommitRecord> stream_commits(const std::string& branch) const;

    /// File contents at `rev`, or nullopt when the path does not exist there.
    [[nodiscard]] std::optional<std::string> read_blob(const std::string& rev, const std::string& file) const;

    /// Java files present at `rev`, sorted.
    [[nodiscard]] std::vector<std::string> list_java_files(const std::string& rev) const;

private:
    std::filesystem::path path_;
    std::string repo_id_;
};

inline std::vector<CommitRecord> stream_commits(const std::filesystem::path& repo_path, const std::string& branch,
                                                const std::string& repo_id = {}) {
    return GitRepository(repo_path, repo_id.empty() ? repo_path.filename().string() : repo_id)
        .stream_commits(branch);
}

/// True when the author name contains "[bot]" or "github", case-insensitively.
bool is_bot_author(std::string_view author_name);

std::vector<CommitRecord> filter_bots(std::vector<CommitRecord> commits);

/// Drops commits touching more than Q3 + 1.5 IQR files. Throws
/// Error(empty_input) on an empty sequence.
std::pair<std::vector<CommitRecord>, OutlierThreshold> filter_outliers(std::vector<CommitRecord> commits);

bool is_java_path(std::string_view path);

/// Valid UTF-8 without NUL bytes; anything else is treated as binary.
bool is_decodable_text(std::string_view data);

}  // namespace pcc
