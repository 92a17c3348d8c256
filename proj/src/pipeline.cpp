#include "pcc/pipeline.hpp"

#include "pcc/dataset.hpp"
#include "pcc/error.hpp"
#include "pcc/hash.hpp"
#include "pcc/identity.hpp"
#include "pcc/java_lexer.hpp"
#include "pcc/process.hpp"
#include "pcc/vcs_miner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace fs = std::filesystem;

namespace pcc {

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::vector<RepoSpec> parse_repos(const nlohmann::json& list, const fs::path& base_dir, const char* key) {
    std::vector<RepoSpec> out;
    std::set<std::string> ids;
    for (const auto& r : list) {
        RepoSpec spec;
        spec.path = r.at("path").get<std::string>();
        spec.id = r.value("id", spec.path.filename().string());
        spec.branch = r.value("branch", std::string("main"));
        if (spec.path.is_relative()) spec.path = base_dir / spec.path;
        if (!ids.insert(spec.id).second) {
            throw Error(ErrorCode::config_error, std::string(key) + ": repository id '" + spec.id + "' listed twice");
        }
        out.push_back(std::move(spec));
    }
    return out;
}

template <class T>
void read_positive(const nlohmann::json& j, const char* key, T& value) {
    if (!j.contains(key)) return;
    j.at(key).get_to(value);
    if (value <= 0) throw Error(ErrorCode::config_error, std::string("caps.") + key + " must be positive");
}

std::optional<fs::path> optional_path(const nlohmann::json& j, const char* key, const fs::path& base_dir) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    return p.is_relative() ? base_dir / p : p;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
    RunConfig c;
    try {
        if (!j.contains("seed")) throw Error(ErrorCode::config_error, "config needs a seed");
        c.organization = j.value("organization", std::string("organization"));
        c.seed = j.at("seed").get<std::uint64_t>();
        if (!j.contains("repos") || j.at("repos").empty()) {
            throw Error(ErrorCode::config_error, "config lists no organization repositories");
        }
        c.repos = parse_repos(j.at("repos"), base_dir, "repos");
        if (j.contains("generic_repos")) c.generic_repos = parse_repos(j.at("generic_repos"), base_dir, "generic_repos");
        for (const auto& g : c.generic_repos) {
            for (const auto& r : c.repos) {
                if (g.id == r.id) throw Error(ErrorCode::config_error, "repository '" + g.id + "' is both generic and organizational");
            }
        }
        if (j.contains("caps")) {
            const auto& caps = j.at("caps");
            read_positive(caps, "top_contributors", c.caps.top_contributors);
            read_positive(caps, "top_developers", c.caps.top_developers);
            read_positive(caps, "methods_per_repo", c.caps.methods_per_repo);
            read_positive(caps, "test_size", c.caps.test_size);
            read_positive(caps, "min_train", c.caps.min_train);
        }
        if (j.contains("method_filter")) {
            const auto& f = j.at("method_filter");
            c.method_limits.min_tokens = f.value("min_tokens", c.method_limits.min_tokens);
            c.method_limits.max_tokens = f.value("max_tokens", c.method_limits.max_tokens);
            if (c.method_limits.min_tokens > c.method_limits.max_tokens) {
                throw Error(ErrorCode::config_error, "method_filter.min_tokens exceeds max_tokens");
            }
        }
        if (j.contains("crystal_bleu")) {
            const auto& cb = j.at("crystal_bleu");
            c.crystal_bleu.k = cb.value("k", c.crystal_bleu.k);
            c.crystal_bleu.max_order = cb.value("max_order", c.crystal_bleu.max_order);
            if (c.crystal_bleu.max_order == 0) throw Error(ErrorCode::config_error, "crystal_bleu.max_order must be positive");
        }
        if (j.contains("mask_lengths")) c.mask_lengths = j.at("mask_lengths").get<MaskLengthDistribution>();
        c.identity_overrides = optional_path(j, "identity_overrides", base_dir);
        c.cost_scenario = optional_path(j, "cost_scenario", base_dir);
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
            if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, e.what());
    }
    c.source = j;
    c.source.erase("output_dir");
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_error, "cannot read config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

nlohmann::json config_identity(const RunConfig& config) {
    nlohmann::json j = config.source;
    j.erase("output_dir");
    j["seed"] = config.seed;
    return j;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(config_identity(config).dump()); }

std::string path_slug(std::string_view text) {
    std::string out;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        out += std::isalnum(c) || ch == '-' || ch == '_' || ch == '.' ? static_cast<char>(std::tolower(c)) : '_';
    }
    if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
    return out;
}

// ---------------------------------------------------------------------------
// Stage bookkeeping

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::data_error, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path, ErrorCode missing = ErrorCode::data_error) {
    std::ifstream in(path);
    if (!in) throw Error(missing, "cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::data_error, path.string() + ": " + e.what());
    }
}

void write_jsonl(const fs::path& path, const std::vector<nlohmann::json>& rows) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::data_error, "cannot write " + path.string());
    for (const auto& r : rows) out << r.dump() << '\n';
}

// sha256 of every file below `dir` except the stage record, keyed by the
// generic relative path.
nlohmann::json hash_tree(const fs::path& dir) {
    std::map<std::string, std::string> hashes;
    if (!fs::exists(dir)) return hashes;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == layout::kStageFile) continue;
        hashes[rel] = sha256_file(entry.path());
    }
    return hashes;
}

bool stage_is_current(const fs::path& dir, const std::string& hash, const nlohmann::json& inputs) {
    auto record_path = dir / layout::kStageFile;
    if (!fs::exists(record_path)) return false;
    try {
        auto record = read_json(record_path);
        return record.at("config_hash") == hash && record.at("inputs") == inputs &&
               record.at("outputs") == hash_tree(dir);
    } catch (const std::exception&) {
        return false;
    }
}

void seal_stage(const fs::path& dir, const std::string& stage, const std::string& hash, const nlohmann::json& inputs) {
    write_json(dir / layout::kStageFile, {{"stage", stage},
                                          {"config_hash", hash},
                                          {"inputs", inputs},
                                          {"outputs", hash_tree(dir)}});
}

// Checks that an upstream stage exists and was produced by this config.
// Returns the hash of its record, the downstream stage's input fingerprint.
std::string require_stage(const fs::path& out, const char* stage, const std::string& hash) {
    auto record_path = out / stage / layout::kStageFile;
    if (!fs::exists(record_path)) {
        throw Error(ErrorCode::missing_stage, "stage '" + std::string(stage) + "' has not been run in " + out.string());
    }
    auto record = read_json(record_path);
    if (record.value("config_hash", std::string{}) != hash) {
        throw Error(ErrorCode::config_hash_mismatch, "stage '" + std::string(stage) +
                                                         "' was produced by a different configuration; rerun it");
    }
    return sha256_file(record_path);
}

void reset_dir(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
}

StageOutcome skipped(const char* stage, const fs::path& dir, std::ostream& log) {
    log << stage << ": up to date, skipping\n";
    StageOutcome o{stage, StageStatus::skipped, {}};
    if (fs::exists(dir / "report.json")) o.report = read_json(dir / "report.json");
    return o;
}

std::string git_rev(const RepoSpec& repo) {
    auto r = run_process({"git", "-C", repo.path.string(), "rev-parse", "--verify", "-q", repo.branch + "^{commit}"});
    if (r.exit_code != 0) {
        if (!fs::exists(repo.path)) throw Error(ErrorCode::repo_unreadable, "no repository at " + repo.path.string());
        throw Error(ErrorCode::branch_missing, "branch '" + repo.branch + "' not found in " + repo.id);
    }
    return r.out.substr(0, 40);
}

}  // namespace

// ---------------------------------------------------------------------------
// mine

namespace {

struct GenericMethod {
    MethodUnit method;
    std::string file;
    std::string sha;
    std::int64_t timestamp = 0;
};

nlohmann::json mine_generic(const RunConfig& config, const fs::path& dir, std::ostream& log) {
    nlohmann::json report{{"repositories", config.generic_repos.size()}};
    std::map<std::string, std::vector<GenericMethod>> by_repo;
    std::map<std::string, std::size_t> filtered;
    std::size_t files = 0;
    std::size_t undecodable = 0;
    std::size_t methods_seen = 0;
    for (const auto& spec : config.generic_repos) {
        GitRepository repo(spec.path, spec.id);
        std::map<std::string, std::pair<std::int64_t, std::string>> last_touch;
        for (const auto& c : repo.stream_commits(spec.branch)) {
            for (const auto& f : c.changed_java_files) last_touch[f] = {c.timestamp, c.sha};
        }
        auto& methods = by_repo[spec.id];
        for (const auto& file : repo.list_java_files(spec.branch)) {
            auto blob = repo.read_blob(spec.branch, file);
            if (!blob) continue;
            ++files;
            if (!is_decodable_text(*blob)) {
                ++undecodable;
                continue;
            }
            auto touch = last_touch.count(file) ? last_touch[file] : std::pair<std::int64_t, std::string>{0, ""};
            for (auto& m : extract_methods(*blob)) {
                ++methods_seen;
                auto verdict = apply_method_filters(m, config.method_limits);
                if (!verdict.kept) {
                    ++filtered[std::string(to_string(verdict.reason))];
                    continue;
                }
                methods.push_back({std::move(m), file, touch.second, touch.first});
            }
        }
        log << "mine: generic " << spec.id << ": " << methods.size() << " valid methods\n";
    }

    auto capped = cap_per_repo(by_repo, config.caps.methods_per_repo, sub_seed(config.seed, "generic-cap"));
    MaskLengthSampler sampler(config.mask_lengths);
    std::vector<CompletionInstance> instances;
    std::vector<nlohmann::json> pretrain;
    std::size_t kept_methods = 0;
    for (const auto& [repo_id, methods] : capped) {
        kept_methods += methods.size();
        for (const auto& gm : methods) {
            std::string key = repo_id + "/" + gm.file + "/" + std::to_string(gm.method.start_line);
            Provenance prov{repo_id, gm.sha, "", gm.timestamp, gm.file};
            std::mt19937_64 rng(sub_seed(config.seed, "generic/" + key));
            for (auto& inst : generate_generic(gm.method, sampler, prov, rng)) instances.push_back(std::move(inst));
            std::mt19937_64 mlm_rng(sub_seed(config.seed, "mlm/" + key));
            auto rec = mlm_pretrain_instances(gm.method, mlm_rng);
            pretrain.push_back({{"repo", repo_id}, {"file", gm.file}, {"signature", gm.method.signature},
                                {"input", rec.input}, {"target", rec.target}, {"masked", rec.masked}});
        }
    }
    sort_chronologically(instances);
    fs::create_directories(dir / "generic");
    write_instances(instances, dir / "generic" / "instances.jsonl");
    write_jsonl(dir / "generic" / "pretrain.jsonl", pretrain);

    report["java_files"] = files;
    report["undecodable_files"] = undecodable;
    report["methods_extracted"] = methods_seen;
    report["methods_filtered"] = filtered;
    report["methods_after_cap"] = kept_methods;
    report["instances"] = instances.size();
    report["pretrain_records"] = pretrain.size();
    return report;
}

}  // namespace

StageOutcome cmd_mine(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const auto hash = config_hash(config);
    const auto dir = out / layout::kMine;
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& r : config.repos) inputs["repo:" + r.id] = git_rev(r);
    for (const auto& r : config.generic_repos) inputs["generic:" + r.id] = git_rev(r);
    if (config.identity_overrides) inputs["identity_overrides"] = sha256_file(*config.identity_overrides);
    if (stage_is_current(dir, hash, inputs)) return skipped(layout::kMine, dir, log);
    reset_dir(dir);

    std::map<std::string, GitRepository> repos;
    std::vector<CommitRecord> commits;
    for (const auto& spec : config.repos) {
        auto& repo = repos.emplace(spec.id, GitRepository(spec.path, spec.id)).first->second;
        auto cs = repo.stream_commits(spec.branch);
        log << "mine: " << spec.id << ": " << cs.size() << " commits\n";
        commits.insert(commits.end(), cs.begin(), cs.end());
    }
    nlohmann::json report{{"config_hash", hash}, {"organization", config.organization}};
    nlohmann::json funnel;
    funnel["commits_total"] = commits.size();
    commits = filter_bots(std::move(commits));
    funnel["commits_after_bot_filter"] = commits.size();
    OutlierThreshold threshold;
    if (!commits.empty()) std::tie(commits, threshold) = filter_outliers(std::move(commits));
    funnel["commits_after_outlier_filter"] = commits.size();
    report["outlier_threshold"] = {{"q3", threshold.q3}, {"iqr", threshold.iqr}, {"cutoff", threshold.cutoff},
                                   {"scope", "organization"}};
    std::stable_sort(commits.begin(), commits.end(), [](const CommitRecord& a, const CommitRecord& b) {
        return std::tie(a.repo_id, a.timestamp, a.sha) < std::tie(b.repo_id, b.timestamp, b.sha);
    });

    std::map<Alias, std::uint64_t> added_by_alias;
    std::vector<CompletionInstance> instances;
    std::map<std::string, std::size_t> filtered;
    std::size_t commits_with_additions = 0;
    std::size_t files_seen = 0;
    std::size_t deleted_files = 0;
    std::size_t undecodable = 0;
    std::size_t added_total = 0;
    std::size_t methods_touched = 0;
    std::size_t methods_kept = 0;
    std::size_t segments_total = 0;
    std::size_t segments_unmaskable = 0;
    for (const auto& c : commits) {
        const auto& repo = repos.at(c.repo_id);
        Alias alias{c.author_name, c.author_email};
        added_by_alias.try_emplace(alias, 0);
        bool any_added = false;
        for (const auto& file : c.changed_java_files) {
            auto child = repo.read_blob(c.sha, file);
            ++files_seen;
            if (!child) {
                ++deleted_files;
                continue;
            }
            std::optional<std::string> parent;
            if (c.first_parent_sha) parent = repo.read_blob(*c.first_parent_sha, file);
            if (!is_decodable_text(*child) || (parent && !is_decodable_text(*parent))) {
                ++undecodable;
                continue;
            }
            auto lines = added_lines(parent.value_or(""), *child, file);
            if (lines.empty()) continue;
            any_added = true;
            added_total += lines.size();
            added_by_alias[alias] += lines.size();
            for (const auto& [method, line_numbers] : map_added_lines(extract_methods(*child), lines)) {
                ++methods_touched;
                auto verdict = apply_method_filters(method, config.method_limits);
                if (!verdict.kept) {
                    ++filtered[std::string(to_string(verdict.reason))];
                    continue;
                }
                ++methods_kept;
                Provenance prov{c.repo_id, c.sha, alias.first + '\x1f' + alias.second, c.timestamp, file};
                auto segments = segment(line_numbers, method);
                for (std::size_t i = 0; i < segments.size(); ++i) {
                    ++segments_total;
                    std::mt19937_64 rng(sub_seed(config.seed, "mask/" + c.repo_id + "/" + c.sha + "/" + file + "/" +
                                                                  std::to_string(method.start_line) + "/" +
                                                                  std::to_string(i)));
                    if (auto inst = mask(segments[i], method, prov, rng)) {
                        instances.push_back(std::move(*inst));
                    } else {
                        ++segments_unmaskable;
                    }
                }
            }
        }
        commits_with_additions += any_added ? 1 : 0;
    }
    funnel["commits_with_added_java_lines"] = commits_with_additions;
    funnel["java_files_changed"] = files_seen;
    funnel["java_files_deleted"] = deleted_files;
    funnel["undecodable_files"] = undecodable;
    funnel["added_lines"] = added_total;
    funnel["methods_with_added_lines"] = methods_touched;
    funnel["methods_filtered"] = filtered;
    funnel["methods_kept"] = methods_kept;
    funnel["segments"] = segments_total;
    funnel["segments_unmaskable"] = segments_unmaskable;
    funnel["instances_masked"] = instances.size();

    IdentityOverrides overrides;
    if (config.identity_overrides) overrides = load_overrides(*config.identity_overrides);
    std::vector<RawAuthor> raw;
    for (const auto& [alias, added] : added_by_alias) raw.push_back({alias.first, alias.second, added});
    auto identities = resolve_identities(raw, overrides);
    auto selected = top_contributors(identities, config.caps.top_contributors);
    auto index = alias_index(selected);

    std::vector<CompletionInstance> kept;
    for (auto& inst : instances) {
        auto sep = inst.author_id.find('\x1f');
        auto it = index.find({inst.author_id.substr(0, sep), inst.author_id.substr(sep + 1)});
        if (it == index.end()) continue;
        inst.author_id = it->second;
        assign_instance_id(inst);
        kept.push_back(std::move(inst));
    }
    std::sort(kept.begin(), kept.end(), [](const CompletionInstance& a, const CompletionInstance& b) {
        return std::tie(a.author_id, a.timestamp, a.commit_sha, a.instance_id) <
               std::tie(b.author_id, b.timestamp, b.commit_sha, b.instance_id);
    });
    funnel["identities"] = identities.size();
    funnel["selected_contributors"] = selected.size();
    funnel["instances_of_selected_contributors"] = kept.size();
    report["funnel"] = funnel;

    std::vector<nlohmann::json> commit_rows(commits.begin(), commits.end());
    write_jsonl(dir / "commits.jsonl", commit_rows);
    std::vector<nlohmann::json> identity_rows;
    std::set<std::string> selected_ids;
    for (const auto& s : selected) selected_ids.insert(s.author_id);
    for (const auto& id : identities) {
        nlohmann::json row = id;
        row["selected"] = selected_ids.count(id.author_id) > 0;
        identity_rows.push_back(std::move(row));
    }
    write_jsonl(dir / "identities.jsonl", identity_rows);
    write_instances(kept, dir / "instances.jsonl");
    report["generic"] = mine_generic(config, dir, log);
    write_json(dir / "report.json", report);
    seal_stage(dir, layout::kMine, hash, inputs);
    log << "mine: " << kept.size() << " instances from " << selected.size() << " contributors\n";
    return {layout::kMine, StageStatus::ran, report};
}

// ---------------------------------------------------------------------------
// assemble

StageOutcome cmd_assemble(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const auto hash = config_hash(config);
    const auto dir = out / layout::kAssemble;
    nlohmann::json inputs{{"mine", require_stage(out, layout::kMine, hash)}};
    if (stage_is_current(dir, hash, inputs)) return skipped(layout::kAssemble, dir, log);
    reset_dir(dir);

    const auto mine_dir = out / layout::kMine;
    auto instances = read_instances(mine_dir / "instances.jsonl");
    auto pool = read_instances(mine_dir / "generic" / "instances.jsonl");
    const auto instances_hash = sha256_file(mine_dir / "instances.jsonl");
    const auto pool_hash = sha256_file(mine_dir / "generic" / "instances.jsonl");

    std::map<std::string, std::vector<CompletionInstance>> per_author;
    for (auto& inst : instances) per_author[inst.author_id].push_back(std::move(inst));
    for (auto& [author, xs] : per_author) sort_chronologically(xs);

    SplitOptions split_opts{config.caps.test_size, config.caps.min_train};
    std::map<std::string, DeveloperSplit> splits;
    std::size_t too_few = 0;
    std::size_t below_min_train = 0;
    nlohmann::json developers = nlohmann::json::array();
    for (const auto& [author, xs] : per_author) {
        nlohmann::json row{{"author", author}, {"instances", xs.size()}};
        if (xs.size() < split_opts.test_size + 1) {
            ++too_few;
            row["status"] = "too-few-instances";
        } else {
            auto split = split_developer(xs, split_opts);
            row["train"] = split.train.size();
            row["val"] = split.val.size();
            row["test"] = split.test.size();
            row["dropped_duplicates"] = split.dropped_duplicates;
            row["dropped_ties"] = split.dropped_ties;
            if (eligible(split, split_opts)) {
                row["status"] = "eligible";
                splits.emplace(author, std::move(split));
            } else {
                ++below_min_train;
                row["status"] = "below-min-train";
            }
        }
        developers.push_back(std::move(row));
    }

    std::vector<std::string> anchors;
    for (const auto& [author, split] : splits) anchors.push_back(author);
    std::stable_sort(anchors.begin(), anchors.end(), [&](const std::string& a, const std::string& b) {
        return per_author.at(a).size() > per_author.at(b).size();
    });
    if (anchors.size() > config.caps.top_developers) anchors.resize(config.caps.top_developers);

    std::vector<std::string> org_repos;
    for (const auto& r : config.repos) org_repos.push_back(r.id);

    nlohmann::json index_rows = nlohmann::json::array();
    nlohmann::json notes = nlohmann::json::array();
    auto emit = [&](Dataset& ds, const std::string& anchor, const std::vector<std::string>& sources) {
        ds.manifest.source_hashes = sources;
        auto rel = fs::path("datasets") / path_slug(anchor) / std::string(to_string(ds.manifest.role));
        auto hashes = write_dataset(ds, dir / rel, hash);
        index_rows.push_back({{"dataset_id", ds.manifest.dataset_id},
                              {"role", std::string(to_string(ds.manifest.role))},
                              {"anchor", anchor},
                              {"dir", (fs::path(layout::kAssemble) / rel).generic_string()},
                              {"counts", {{"train", ds.train.size()}, {"val", ds.val.size()}, {"test", ds.test.size()}}},
                              {"files", hashes}});
    };
    auto audit = [&](const Dataset& ds, const Dataset& anchor) {
        auto violations = audit_dataset(ds, anchor);
        if (!violations.empty()) {
            throw Error(ErrorCode::data_error, ds.manifest.dataset_id + " failed its audit: " + violations.front());
        }
    };

    for (const auto& anchor : anchors) {
        auto dev = make_developer_dataset(anchor, splits.at(anchor), sub_seed(config.seed, "developer/" + anchor));
        audit(dev, dev);
        emit(dev, anchor, {instances_hash});

        auto org = build_org_dataset(per_author, dev, sub_seed(config.seed, "organization/" + anchor));
        audit(org, dev);
        emit(org, anchor, {instances_hash});

        try {
            auto subset = build_org_subset(org, dev, sub_seed(config.seed, "org-subset/" + anchor));
            audit(subset, dev);
            emit(subset, anchor, {instances_hash});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::target_too_large) throw;
            notes.push_back({{"anchor", anchor}, {"role", "org-subset"}, {"skipped", e.what()}});
        }

        try {
            auto plus = build_baseline_plus(pool, org, dev, org_repos, sub_seed(config.seed, "baseline-plus/" + anchor));
            audit(plus, dev);
            emit(plus, anchor, {instances_hash, pool_hash});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::target_too_large) throw;
            notes.push_back({{"anchor", anchor}, {"role", "baseline-plus"}, {"skipped", e.what()}});
        }
        log << "assemble: datasets for " << anchor << " written\n";
    }

    write_json(dir / "index.json", {{"config_hash", hash}, {"manifests", index_rows}});
    nlohmann::json report{{"config_hash", hash},
                          {"developers_with_instances", per_author.size()},
                          {"too_few_instances", too_few},
                          {"below_min_train", below_min_train},
                          {"eligible", splits.size()},
                          {"selected_anchors", anchors},
                          {"manifests", index_rows.size()},
                          {"skipped", notes},
                          {"developers", developers}};
    write_json(dir / "report.json", report);
    seal_stage(dir, layout::kAssemble, hash, inputs);
    log << "assemble: " << index_rows.size() << " manifests, " << splits.size() << " eligible developers\n";
    return {layout::kAssemble, StageStatus::ran, report};
}

// ---------------------------------------------------------------------------
// insight

namespace {

std::vector<CostScenario> default_cost_scenarios() {
    // Per-inference delta recovered from 0.75 USD / 44,948 inferences.
    CostScenario best{"best-case", 0.75, 0.0, 1.6686e-5, 10, 1150};
    CostScenario worst{"worst-case", 4.53, 0.0, 1.6686e-5, 10, 1150};
    return {best, worst};
}

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    std::size_t mid = xs.size() / 2;
    return xs.size() % 2 ? xs[mid] : (xs[mid - 1] + xs[mid]) / 2.0;
}

}  // namespace

StageOutcome cmd_insight(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const auto hash = config_hash(config);
    const auto dir = out / layout::kInsight;
    nlohmann::json inputs{{"assemble", require_stage(out, layout::kAssemble, hash)}};
    if (config.cost_scenario) inputs["cost_scenario"] = sha256_file(*config.cost_scenario);
    if (stage_is_current(dir, hash, inputs)) return skipped(layout::kInsight, dir, log);
    reset_dir(dir);

    auto index = read_json(out / layout::kAssemble / "index.json");
    std::map<std::string, std::string> developer_dirs;
    for (const auto& m : index.at("manifests")) {
        if (m.at("role") == "developer") developer_dirs[m.at("anchor")] = m.at("dir");
    }
    nlohmann::json rows = nlohmann::json::array();
    std::map<std::string, std::array<std::vector<double>, 3>> by_role;
    for (const auto& m : index.at("manifests")) {
        auto ds = read_dataset(out / m.at("dir").get<std::string>());
        auto anchor = read_dataset(out / developer_dirs.at(m.at("anchor")));
        auto cov = coverage_report(anchor.test, ds.train);
        std::string role = m.at("role");
        by_role[role][0].push_back(cov.signature_coverage);
        by_role[role][1].push_back(cov.vocab_coverage);
        by_role[role][2].push_back(cov.training_relevance);
        rows.push_back({{"dataset_id", m.at("dataset_id")}, {"role", role}, {"developer", m.at("anchor")},
                        {"coverage", cov}});
    }
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [role, values] : by_role) {
        summary[role] = {{"datasets", values[0].size()},
                         {"median_signature_coverage", median(values[0])},
                         {"median_vocab_coverage", median(values[1])},
                         {"median_training_relevance", median(values[2])}};
    }
    write_json(dir / "coverage.json", {{"config_hash", hash}, {"reports", rows}, {"summary", summary}});

    auto scenarios = config.cost_scenario ? load_cost_scenarios(*config.cost_scenario) : default_cost_scenarios();
    nlohmann::json cost_rows = nlohmann::json::array();
    double horizon = 0.0;
    for (const auto& s : scenarios) horizon = std::max(horizon, breakeven_inferences(s));
    horizon = horizon > 0.0 ? horizon * 1.5 : 1000.0;
    for (const auto& s : scenarios) {
        double n_star = breakeven_inferences(s);
        auto weeks = weeks_to_breakeven(n_star, s);
        auto name = path_slug(s.name.empty() ? "scenario" : s.name);
        write_cost_curve_csv(cost_curve(s, horizon, 100), dir / ("cost_curve_" + name + ".csv"));
        cost_rows.push_back({{"scenario", s}, {"breakeven_inferences", n_star}, {"weeks_raw", weeks.raw},
                             {"weeks", weeks.whole}, {"curve", "cost_curve_" + name + ".csv"}});
    }
    write_json(dir / "cost.json", {{"config_hash", hash}, {"scenarios", cost_rows}});

    nlohmann::json report{{"config_hash", hash}, {"coverage_reports", rows.size()}, {"cost_scenarios", cost_rows.size()}};
    write_json(dir / "report.json", report);
    seal_stage(dir, layout::kInsight, hash, inputs);
    log << "insight: " << rows.size() << " coverage reports, " << cost_rows.size() << " cost scenarios\n";
    return {layout::kInsight, StageStatus::ran, report};
}

// ---------------------------------------------------------------------------
// verify

namespace {

void check_instance(const CompletionInstance& inst, const std::string& where, std::vector<std::string>& out) {
    auto first = inst.context.find(kFillSentinel);
    if (first == std::string::npos || inst.context.find(kFillSentinel, first + 1) != std::string::npos) {
        out.push_back(where + ": instance " + inst.instance_id + " does not hold exactly one sentinel");
    }
    if (inst.n < 3 || inst.N < 4 || inst.n > std::min<std::size_t>(50, inst.N - 1)) {
        out.push_back(where + ": instance " + inst.instance_id + " has n=" + std::to_string(inst.n) +
                      " outside [3, min(50, N-1)] for N=" + std::to_string(inst.N));
    }
}

}  // namespace

std::vector<std::string> cmd_verify(const fs::path& out) {
    std::vector<std::string> violations;
    std::optional<std::string> hash;
    for (const char* stage : {layout::kMine, layout::kAssemble, layout::kInsight}) {
        auto record_path = out / stage / layout::kStageFile;
        if (!fs::exists(record_path)) {
            violations.push_back(std::string("stage '") + stage + "' is missing");
            continue;
        }
        auto record = read_json(record_path);
        auto h = record.value("config_hash", std::string{});
        if (hash && *hash != h) violations.push_back(std::string("stage '") + stage + "' has a different config hash");
        hash = h;
        if (record.at("outputs") != hash_tree(out / stage)) {
            violations.push_back(std::string("stage '") + stage + "' outputs changed since the stage ran");
        }
    }
    if (fs::exists(out / layout::kMine / "instances.jsonl")) {
        for (const auto& inst : read_instances(out / layout::kMine / "instances.jsonl")) {
            check_instance(inst, "mine/instances.jsonl", violations);
        }
    }
    if (!fs::exists(out / layout::kAssemble / "index.json")) return violations;

    auto index = read_json(out / layout::kAssemble / "index.json");
    std::map<std::string, Dataset> anchors;
    for (const auto& m : index.at("manifests")) {
        if (m.at("role") == "developer") anchors[m.at("anchor")] = read_dataset(out / m.at("dir").get<std::string>());
    }
    for (const auto& m : index.at("manifests")) {
        auto dir = out / m.at("dir").get<std::string>();
        for (const auto& [file, expected] : m.at("files").items()) {
            if (!fs::exists(dir / file) || sha256_file(dir / file) != expected.get<std::string>()) {
                violations.push_back(m.at("dataset_id").get<std::string>() + ": " + file + " does not match the index");
            }
        }
        auto ds = read_dataset(dir);
        auto it = anchors.find(m.at("anchor"));
        if (it == anchors.end()) {
            violations.push_back(ds.manifest.dataset_id + ": anchor developer dataset is missing");
            continue;
        }
        for (auto& v : audit_dataset(ds, it->second)) violations.push_back(ds.manifest.dataset_id + ": " + v);
        for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
            for (const auto& inst : *split) check_instance(inst, ds.manifest.dataset_id, violations);
        }
    }
    return violations;
}

std::vector<StageOutcome> cmd_run(const RunConfig& config, const fs::path& out, std::ostream& log,
                                  const std::optional<std::string>& only) {
    using StageFn = StageOutcome (*)(const RunConfig&, const fs::path&, std::ostream&);
    const std::vector<std::pair<std::string, StageFn>> stages{
        {layout::kMine, &cmd_mine}, {layout::kAssemble, &cmd_assemble}, {layout::kInsight, &cmd_insight}};
    if (only && std::none_of(stages.begin(), stages.end(), [&](const auto& s) { return s.first == *only; })) {
        throw Error(ErrorCode::config_error, "unknown stage '" + *only + "' (expected mine, assemble or insight)");
    }
    std::vector<StageOutcome> outcomes;
    for (const auto& [name, fn] : stages) {
        if (only && name != *only) continue;
        outcomes.push_back(fn(config, out, log));
    }
    if (!only) {
        auto violations = cmd_verify(out);
        if (!violations.empty()) {
            throw Error(ErrorCode::data_error, std::to_string(violations.size()) + " verification failures, first: " +
                                                   violations.front());
        }
        log << "verify: clean\n";
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// score / compare

nlohmann::json cmd_score(const ScoreInputs& inputs) {
    auto ds = read_dataset(inputs.dataset);
    if (ds.test.empty()) throw Error(ErrorCode::data_error, ds.manifest.dataset_id + " has no test instances");
    std::vector<PredictionRecord> preds;
    for (const auto& p : inputs.predictions) {
        auto rs = read_predictions(p);
        preds.insert(preds.end(), rs.begin(), rs.end());
    }
    const auto& corpus_train = inputs.ngram_corpus ? read_dataset(*inputs.ngram_corpus).train : ds.train;
    std::vector<Tokens> corpus;
    corpus.reserve(corpus_train.size());
    for (const auto& inst : corpus_train) corpus.push_back(token_texts(inst.target));
    auto trivial = trivially_shared_ngrams(corpus, inputs.options.k, inputs.options.max_order);

    std::set<std::string> models;
    for (const auto& p : preds) models.insert(p.model_id);
    auto reports = corpus_report(ds.test, preds, trivial, inputs.options, {models.begin(), models.end()});
    nlohmann::json j{{"dataset", ds.manifest.dataset_id},
                     {"test_instances", ds.test.size()},
                     {"trivial_ngrams", trivial.size()},
                     {"crystal_bleu", {{"k", inputs.options.k}, {"max_order", inputs.options.max_order}}},
                     {"models", nlohmann::json::object()}};
    for (const auto& [model, rep] : reports) j["models"][model] = rep;
    return j;
}

Comparison cmd_compare(const std::vector<nlohmann::json>& reports, const std::string& model_a,
                       const std::string& model_b) {
    auto find = [&](const std::string& model) {
        for (const auto& r : reports) {
            if (r.contains("models") && r.at("models").contains(model)) return r.at("models").at(model).get<ModelReport>();
        }
        throw Error(ErrorCode::data_error, "model '" + model + "' not found in the given reports");
    };
    return compare_models(find(model_a), find(model_b));
}

std::string format_comparison(const Comparison& c) {
    auto p = [](double v) {
        std::ostringstream s;
        s << std::setprecision(4) << v;
        return s.str();
    };
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "metric        " << std::setw(10) << c.model_a << ' ' << std::setw(10) << c.model_b
        << "      delta   p-value  effect\n";
    out << "EM%           " << std::setw(10) << c.em_percent_a << ' ' << std::setw(10) << c.em_percent_b << ' '
        << std::setw(10) << c.em_percent_a - c.em_percent_b << ' ' << std::setw(9) << p(c.em.p_value) << "  OR="
        << (c.em.effect_infinite ? std::string("inf") : p(c.em.effect)) << (c.em.significant ? " *" : "") << '\n';
    out << "CrystalBLEU%  " << std::setw(10) << 100.0 * c.cb_mean_a << ' ' << std::setw(10) << 100.0 * c.cb_mean_b
        << ' ' << std::setw(10) << 100.0 * (c.cb_mean_a - c.cb_mean_b) << ' ' << std::setw(9) << p(c.cb.p_value)
        << "  d=" << p(c.cb.effect) << (c.cb.significant ? " *" : "") << '\n';
    out << "pairs: n11=" << c.outcome.n11 << " n10=" << c.outcome.n10 << " n01=" << c.outcome.n01
        << " n00=" << c.outcome.n00 << '\n';
    return out.str();
}

}  // namespace pcc
