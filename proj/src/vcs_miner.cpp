#include "pcc/vcs_miner.hpp"

#include "pcc/error.hpp"
#include "pcc/process.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace pcc {

void to_json(nlohmann::json& j, const CommitRecord& c) {
    j = nlohmann::json{{"repo_id", c.repo_id},
                       {"sha", c.sha},
                       {"author_name", c.author_name},
                       {"author_email", c.author_email},
                       {"timestamp", c.timestamp},
                       {"first_parent_sha", c.first_parent_sha ? nlohmann::json(*c.first_parent_sha) : nlohmann::json()},
                       {"changed_java_files", c.changed_java_files},
                       {"files_changed_count", c.files_changed_count}};
}

void from_json(const nlohmann::json& j, CommitRecord& c) {
    j.at("repo_id").get_to(c.repo_id);
    j.at("sha").get_to(c.sha);
    j.at("author_name").get_to(c.author_name);
    j.at("author_email").get_to(c.author_email);
    j.at("timestamp").get_to(c.timestamp);
    const auto& parent = j.at("first_parent_sha");
    c.first_parent_sha = parent.is_null() ? std::nullopt : std::optional<std::string>(parent.get<std::string>());
    j.at("changed_java_files").get_to(c.changed_java_files);
    j.at("files_changed_count").get_to(c.files_changed_count);
}

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::empty_input, "quantile of empty sample");
    double h = static_cast<double>(sorted.size() - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

ProcessResult git(const std::filesystem::path& repo, std::vector<std::string> args) {
    args.insert(args.begin(), {"git", "-C", repo.string(), "-c", "core.quotepath=off"});
    return run_process(args, {{"GIT_CONFIG_NOSYSTEM", "1"}, {"LC_ALL", "C"}});
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        auto next = s.find(sep, pos);
        out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

GitRepository::GitRepository(std::filesystem::path path, std::string repo_id)
    : path_(std::move(path)), repo_id_(std::move(repo_id)) {
    std::error_code ec;
    if (!std::filesystem::is_directory(path_, ec)) {
        throw Error(ErrorCode::repo_unreadable, path_.string() + " is not a directory");
    }
    auto r = git(path_, {"rev-parse", "--git-dir"});
    if (r.exit_code != 0) throw Error(ErrorCode::repo_unreadable, path_.string() + " is not a git repository");
}

std::vector<CommitRecord> GitRepository::stream_commits(const std::string& branch) const {
    auto verify = git(path_, {"rev-parse", "--verify", "-q", branch + "^{commit}"});
    if (verify.exit_code != 0) {
        auto refs = git(path_, {"for-each-ref", "--count=1"});
        if (refs.exit_code == 0 && refs.out.empty()) return {};  // no commits at all
        throw Error(ErrorCode::branch_missing, "branch '" + branch + "' not found in " + path_.string());
    }

    auto log = git(path_, {"log", "--first-parent", "--reverse", "--diff-merges=first-parent", "--no-renames",
                           "--name-only", "-z", "--format=%x1e%H%x1f%P%x1f%an%x1f%ae%x1f%at", branch, "--"});
    if (log.exit_code != 0) throw Error(ErrorCode::repo_unreadable, "git log failed in " + path_.string());

    std::vector<CommitRecord> commits;
    for (const auto& record : split(log.out, '\x1e')) {
        if (record.empty()) continue;
        auto header_end = record.find('\0');
        std::string_view header(record.data(), header_end == std::string::npos ? record.size() : header_end);
        auto fields = split(header, '\x1f');
        if (fields.size() != 5) throw Error(ErrorCode::data_error, "unexpected git log record");

        CommitRecord c;
        c.repo_id = repo_id_;
        c.sha = fields[0];
        auto parents = split(fields[1], ' ');
        if (!parents.empty() && !parents[0].empty()) c.first_parent_sha = parents[0];
        c.author_name = fields[2];
        c.author_email = fields[3];
        c.timestamp = std::stoll(fields[4]);

        if (header_end != std::string::npos) {
            for (auto& file : split(std::string_view(record).substr(header_end + 1), '\0')) {
                auto first = file.find_first_not_of('\n');
                if (first == std::string::npos) continue;
                file.erase(0, first);
                ++c.files_changed_count;
                if (is_java_path(file)) c.changed_java_files.push_back(file);
            }
        }
        std::sort(c.changed_java_files.begin(), c.changed_java_files.end());
        commits.push_back(std::move(c));
    }
    return commits;
}

std::optional<std::string> GitRepository::read_blob(const std::string& rev, const std::string& file) const {
    auto r = git(path_, {"cat-file", "blob", rev + ":" + file});
    if (r.exit_code != 0) return std::nullopt;
    return std::move(r.out);
}

std::vector<std::string> GitRepository::list_java_files(const std::string& rev) const {
    auto r = git(path_, {"ls-tree", "-r", "-z", "--name-only", rev});
    if (r.exit_code != 0) throw Error(ErrorCode::branch_missing, "cannot list tree of " + rev);
    std::vector<std::string> files;
    for (auto& f : split(r.out, '\0')) {
        if (!f.empty() && is_java_path(f)) files.push_back(std::move(f));
    }
    std::sort(files.begin(), files.end());
    return files;
}

bool is_bot_author(std::string_view author_name) {
    std::string lower(author_name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return lower.find("[bot]") != std::string::npos || lower.find("github") != std::string::npos;
}

std::vector<CommitRecord> filter_bots(std::vector<CommitRecord> commits) {
    std::erase_if(commits, [](const CommitRecord& c) { return is_bot_author(c.author_name); });
    return commits;
}

std::pair<std::vector<CommitRecord>, OutlierThreshold> filter_outliers(std::vector<CommitRecord> commits) {
    if (commits.empty()) throw Error(ErrorCode::empty_input, "outlier filter needs at least one commit");
    std::vector<double> counts;
    counts.reserve(commits.size());
    for (const auto& c : commits) counts.push_back(static_cast<double>(c.files_changed_count));
    std::sort(counts.begin(), counts.end());

    OutlierThreshold t;
    t.q3 = quantile_type7(counts, 0.75);
    t.iqr = t.q3 - quantile_type7(counts, 0.25);
    t.cutoff = t.q3 + 1.5 * t.iqr;
    std::erase_if(commits, [&t](const CommitRecord& c) { return static_cast<double>(c.files_changed_count) > t.cutoff; });
    return {std::move(commits), t};
}

bool is_java_path(std::string_view path) {
    return path.size() > 5 && path.substr(path.size() - 5) == ".java";
}

bool is_decodable_text(std::string_view data) {
    std::size_t i = 0;
    while (i < data.size()) {
        auto c = static_cast<unsigned char>(data[i]);
        if (c == 0) return false;
        std::size_t len = 0;
        if (c < 0x80) {
            len = 1;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            len = 4;
        } else {
            return false;
        }
        if (i + len > data.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(data[i + k]) & 0xC0) != 0x80) return false;
        }
        i += len;
    }
    return true;
}

}  // namespace pcc
