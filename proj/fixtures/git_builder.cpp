#include "git_builder.hpp"

#include "pcc/error.hpp"
#include "pcc/process.hpp"

#include <fstream>
#include <vector>

namespace pcc::fixtures {

GitBuilder::GitBuilder(std::filesystem::path dir, const std::string& branch) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    git({"init", "-q", "-b", branch});
}

void GitBuilder::write(const std::string& file, const std::string& content) {
    auto path = dir_ / file;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << content;
}

void GitBuilder::remove(const std::string& file) { std::filesystem::remove(dir_ / file); }

std::string GitBuilder::commit(const std::string& author, const std::string& email, std::int64_t ts,
                               const std::string& message) {
    git({"add", "-A"});
    git({"commit", "-q", "--allow-empty", "-m", message}, author, email, ts);
    auto sha = git({"rev-parse", "HEAD"});
    return sha.substr(0, 40);
}

void GitBuilder::checkout(const std::string& branch, bool create) {
    if (create) {
        git({"checkout", "-q", "-b", branch});
    } else {
        git({"checkout", "-q", branch});
    }
}

std::string GitBuilder::merge(const std::string& branch, const std::string& author, const std::string& email,
                              std::int64_t ts) {
    git({"merge", "-q", "--no-ff", "-m", "Merge " + branch, branch}, author, email, ts);
    return git({"rev-parse", "HEAD"}).substr(0, 40);
}

std::string GitBuilder::git(const std::vector<std::string>& args, const std::string& author, const std::string& email,
                            std::int64_t ts) {
    std::vector<std::string> argv{"git", "-C", dir_.string(), "-c", "commit.gpgsign=false", "-c", "core.autocrlf=false"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::string date = "@" + std::to_string(ts) + " +0000";
    auto r = run_process(argv, {{"GIT_AUTHOR_NAME", author},
                                {"GIT_AUTHOR_EMAIL", email},
                                {"GIT_AUTHOR_DATE", date},
                                {"GIT_COMMITTER_NAME", author},
                                {"GIT_COMMITTER_EMAIL", email},
                                {"GIT_COMMITTER_DATE", date},
                                {"GIT_CONFIG_NOSYSTEM", "1"},
                                {"GIT_CONFIG_GLOBAL", "/dev/null"},
                                {"HOME", dir_.string()}});
    if (r.exit_code != 0) throw Error(ErrorCode::data_error, "git " + args.front() + " failed in " + dir_.string());
    return r.out;
}

}  // namespace pcc::fixtures
