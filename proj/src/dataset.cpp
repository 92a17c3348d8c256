#include "pcc/dataset.hpp"

#include "pcc/error.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <tuple>
#include <unordered_set>

namespace pcc {

std::string_view to_string(DatasetRole role) {
    switch (role) {
        case DatasetRole::developer: return "developer";
        case DatasetRole::organization: return "organization";
        case DatasetRole::org_subset: return "org-subset";
        case DatasetRole::baseline_plus: return "baseline-plus";
        case DatasetRole::generic_finetune: return "generic-finetune";
        case DatasetRole::pretrain: return "pretrain";
    }
    return "unknown";
}

DatasetRole dataset_role_from_string(std::string_view text) {
    for (auto role : {DatasetRole::developer, DatasetRole::organization, DatasetRole::org_subset,
                      DatasetRole::baseline_plus, DatasetRole::generic_finetune, DatasetRole::pretrain}) {
        if (to_string(role) == text) return role;
    }
    throw Error(ErrorCode::data_error, "unknown dataset role '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
    j = nlohmann::json{{"dataset_id", m.dataset_id},
                       {"role", std::string(to_string(m.role))},
                       {"anchor_developer", m.anchor_developer ? nlohmann::json(*m.anchor_developer) : nlohmann::json()},
                       {"cutoff_ts", m.cutoff_ts ? nlohmann::json(*m.cutoff_ts) : nlohmann::json()},
                       {"counts", {{"train", m.counts.train}, {"val", m.counts.val}, {"test", m.counts.test}}},
                       {"seed", m.seed},
                       {"source_hashes", m.source_hashes}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
    j.at("dataset_id").get_to(m.dataset_id);
    m.role = dataset_role_from_string(j.at("role").get<std::string>());
    const auto& anchor = j.at("anchor_developer");
    m.anchor_developer = anchor.is_null() ? std::nullopt : std::optional<std::string>(anchor.get<std::string>());
    const auto& cutoff = j.at("cutoff_ts");
    m.cutoff_ts = cutoff.is_null() ? std::nullopt : std::optional<std::int64_t>(cutoff.get<std::int64_t>());
    const auto& counts = j.at("counts");
    counts.at("train").get_to(m.counts.train);
    counts.at("val").get_to(m.counts.val);
    counts.at("test").get_to(m.counts.test);
    j.at("seed").get_to(m.seed);
    j.at("source_hashes").get_to(m.source_hashes);
}

void sort_chronologically(std::vector<CompletionInstance>& instances) {
    std::sort(instances.begin(), instances.end(), [](const CompletionInstance& a, const CompletionInstance& b) {
        return std::tie(a.timestamp, a.commit_sha, a.instance_id) < std::tie(b.timestamp, b.commit_sha, b.instance_id);
    });
}

std::string dedup_key(const CompletionInstance& inst) {
    std::string key;
    auto append = [&key](std::string_view text) {
        for (const auto& t : lex(text)) {
            if (t.kind == TokenKind::whitespace) continue;
            key += t.text;
            key += ' ';
        }
    };
    append(inst.context);
    key += '\x1f';
    append(inst.target);
    return key;
}

std::vector<CompletionInstance> dedup(std::vector<CompletionInstance> train,
                                      const std::vector<CompletionInstance>& holdout) {
    std::unordered_set<std::string> keys;
    for (const auto& h : holdout) keys.insert(dedup_key(h));
    std::erase_if(train, [&](const CompletionInstance& t) { return keys.count(dedup_key(t)) != 0; });
    return train;
}

namespace {

template <class... Sets>
std::vector<CompletionInstance> concat(const Sets&... sets) {
    std::vector<CompletionInstance> out;
    (out.insert(out.end(), sets.begin(), sets.end()), ...);
    return out;
}

std::int64_t min_ts(const std::vector<CompletionInstance>& xs) {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (const auto& x : xs) m = std::min(m, x.timestamp);
    return m;
}

std::int64_t max_ts(const std::vector<CompletionInstance>& xs) {
    std::int64_t m = std::numeric_limits<std::int64_t>::min();
    for (const auto& x : xs) m = std::max(m, x.timestamp);
    return m;
}

// Oldest 90% (floor) to train, the rest to val.
std::pair<std::vector<CompletionInstance>, std::vector<CompletionInstance>> recency_split(
    std::vector<CompletionInstance> pool) {
    sort_chronologically(pool);
    auto n_train = static_cast<std::ptrdiff_t>(pool.size() * 9 / 10);
    std::vector<CompletionInstance> train(pool.begin(), pool.begin() + n_train);
    std::vector<CompletionInstance> val(pool.begin() + n_train, pool.end());
    return {std::move(train), std::move(val)};
}

}  // namespace

DeveloperSplit split_developer(std::vector<CompletionInstance> instances, const SplitOptions& opts) {
    if (instances.size() < opts.test_size + 1) {
        throw Error(ErrorCode::too_few_instances, std::to_string(instances.size()) + " instances, need at least " +
                                                      std::to_string(opts.test_size + 1));
    }
    sort_chronologically(instances);
    DeveloperSplit out;
    auto test_begin = instances.end() - static_cast<std::ptrdiff_t>(opts.test_size);
    out.test.assign(test_begin, instances.end());
    instances.erase(test_begin, instances.end());
    std::tie(out.train, out.val) = recency_split(std::move(instances));

    auto holdout = concat(out.val, out.test);
    std::size_t before = out.train.size();
    out.train = dedup(std::move(out.train), holdout);
    out.dropped_duplicates = before - out.train.size();

    std::int64_t first_holdout = min_ts(holdout);
    before = out.train.size();
    std::erase_if(out.train, [&](const CompletionInstance& t) { return t.timestamp >= first_holdout; });
    out.dropped_ties = before - out.train.size();
    return out;
}

bool eligible(const DeveloperSplit& split, const SplitOptions& opts) {
    return split.train.size() >= opts.min_train && split.test.size() == opts.test_size;
}

Dataset make_developer_dataset(const std::string& author_id, const DeveloperSplit& split, std::uint64_t seed) {
    Dataset ds;
    ds.manifest.dataset_id = "developer/" + author_id;
    ds.manifest.role = DatasetRole::developer;
    ds.manifest.anchor_developer = author_id;
    ds.manifest.seed = seed;
    ds.train = split.train;
    ds.val = split.val;
    ds.test = split.test;
    if (!ds.train.empty()) ds.manifest.cutoff_ts = max_ts(ds.train);
    ds.refresh_counts();
    return ds;
}

Dataset build_org_dataset(const std::map<std::string, std::vector<CompletionInstance>>& per_author,
                          const Dataset& anchor, std::uint64_t seed) {
    if (anchor.train.empty() || anchor.test.empty() || !anchor.manifest.anchor_developer) {
        throw Error(ErrorCode::anchor_ineligible, "anchor dataset '" + anchor.manifest.dataset_id +
                                                      "' lacks a training or test split");
    }
    const auto& author = *anchor.manifest.anchor_developer;
    auto holdout = concat(anchor.val, anchor.test);
    std::int64_t cutoff = std::min(max_ts(anchor.train), min_ts(holdout) - 1);

    std::vector<CompletionInstance> pool;
    for (const auto& [who, instances] : per_author) {
        for (const auto& inst : instances) {
            if (inst.timestamp <= cutoff) pool.push_back(inst);
        }
    }
    pool = dedup(std::move(pool), holdout);

    Dataset ds;
    ds.manifest.dataset_id = "organization/" + author;
    ds.manifest.role = DatasetRole::organization;
    ds.manifest.anchor_developer = author;
    ds.manifest.cutoff_ts = cutoff;
    ds.manifest.seed = seed;
    std::tie(ds.train, ds.val) = recency_split(std::move(pool));
    ds.train = dedup(std::move(ds.train), ds.val);
    ds.test = anchor.test;
    ds.refresh_counts();
    return ds;
}

void throw_target_too_large(std::size_t target, std::size_t available) {
    throw Error(ErrorCode::target_too_large,
                "requested " + std::to_string(target) + " items from a pool of " + std::to_string(available));
}

Dataset build_org_subset(const Dataset& org, const Dataset& anchor, std::uint64_t seed) {
    auto pool = concat(org.train, org.val);
    sort_chronologically(pool);
    auto sample = sample_exact(pool, anchor.train.size() + anchor.val.size(), seed);

    Dataset ds;
    ds.manifest = org.manifest;
    ds.manifest.dataset_id = "org-subset/" + anchor.manifest.anchor_developer.value_or("");
    ds.manifest.role = DatasetRole::org_subset;
    ds.manifest.seed = seed;
    std::tie(ds.train, ds.val) = recency_split(std::move(sample));
    ds.train = dedup(std::move(ds.train), ds.val);
    ds.test = org.test;
    ds.refresh_counts();
    return ds;
}

Dataset build_baseline_plus(const std::vector<CompletionInstance>& generic_pool, const Dataset& org,
                            const Dataset& anchor, const std::vector<std::string>& org_repos, std::uint64_t seed) {
    if (anchor.test.empty()) {
        throw Error(ErrorCode::anchor_ineligible, "anchor '" + anchor.manifest.dataset_id + "' has no test split");
    }
    std::set<std::string> org_set(org_repos.begin(), org_repos.end());
    std::int64_t first_test = min_ts(anchor.test);
    std::vector<CompletionInstance> pool;
    for (const auto& inst : generic_pool) {
        if (org_set.count(inst.repo_id) != 0) {
            throw Error(ErrorCode::data_error, "generic pool contains organization repository '" + inst.repo_id + "'");
        }
        if (inst.timestamp < first_test) pool.push_back(inst);
    }
    pool = dedup(std::move(pool), anchor.test);
    sort_chronologically(pool);
    auto sample = sample_exact(pool, org.train.size() + org.val.size(), seed);

    Dataset ds;
    ds.manifest.dataset_id = "baseline-plus/" + anchor.manifest.anchor_developer.value_or("");
    ds.manifest.role = DatasetRole::baseline_plus;
    ds.manifest.anchor_developer = anchor.manifest.anchor_developer;
    ds.manifest.cutoff_ts = first_test - 1;
    ds.manifest.seed = seed;
    std::tie(ds.train, ds.val) = recency_split(std::move(sample));
    ds.train = dedup(std::move(ds.train), ds.val);
    ds.test = anchor.test;
    ds.refresh_counts();
    return ds;
}

std::vector<std::string> audit_dataset(const Dataset& ds, const Dataset& anchor) {
    std::vector<std::string> out;
    const auto& id = ds.manifest.dataset_id;
    auto fail = [&](const std::string& what) { out.push_back(id + ": " + what); };

    if (ds.manifest.counts != SplitCounts{ds.train.size(), ds.val.size(), ds.test.size()}) {
        fail("manifest counts disagree with the split files");
    }
    auto role = ds.manifest.role;
    if (role == DatasetRole::generic_finetune || role == DatasetRole::pretrain) return out;
    if (!ds.manifest.cutoff_ts || !ds.manifest.anchor_developer) {
        fail("missing cutoff or anchor");
        return out;
    }
    std::int64_t cutoff = *ds.manifest.cutoff_ts;

    std::vector<CompletionInstance> guarded;  // items training must strictly predate
    std::vector<CompletionInstance> holdout;  // items training must not duplicate
    if (role == DatasetRole::baseline_plus) {
        guarded = anchor.test;
        holdout = concat(ds.val, ds.test);
    } else {
        guarded = concat(anchor.val, anchor.test);
        holdout = concat(ds.val, ds.test, anchor.val, anchor.test);
    }
    if (!ds.train.empty() && max_ts(ds.train) > cutoff) {
        fail("train timestamp " + std::to_string(max_ts(ds.train)) + " exceeds cutoff " + std::to_string(cutoff));
    }
    if (!guarded.empty() && cutoff >= min_ts(guarded)) {
        fail("cutoff " + std::to_string(cutoff) + " is not before the first evaluation timestamp " +
             std::to_string(min_ts(guarded)));
    }
    if (role != DatasetRole::developer) {
        std::set<std::string> a, b;
        for (const auto& t : ds.test) a.insert(t.instance_id);
        for (const auto& t : anchor.test) b.insert(t.instance_id);
        if (a != b) fail("test split differs from the anchor's test split");
    }
    std::unordered_set<std::string> keys;
    for (const auto& h : holdout) keys.insert(dedup_key(h));
    for (const auto& t : ds.train) {
        if (keys.count(dedup_key(t)) != 0) {
            fail("train instance " + t.instance_id + " duplicates an evaluation instance");
            break;
        }
    }
    return out;
}

std::vector<CompletionInstance> read_instances(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    if (!in) throw Error(ErrorCode::data_error, "cannot read " + jsonl.string());
    std::vector<CompletionInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<CompletionInstance>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::data_error, jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_instances(const std::vector<CompletionInstance>& instances, const std::filesystem::path& jsonl) {
    std::ofstream out(jsonl, std::ios::binary);
    if (!out) throw Error(ErrorCode::data_error, "cannot write " + jsonl.string());
    for (const auto& inst : instances) out << nlohmann::json(inst).dump() << '\n';
}

std::map<std::string, std::string> write_dataset(const Dataset& ds, const std::filesystem::path& dir,
                                                 const std::string& config_hash) {
    std::filesystem::create_directories(dir);
    std::map<std::string, std::string> hashes;
    for (const auto& [name, split] : {std::pair{"train.jsonl", &ds.train}, std::pair{"val.jsonl", &ds.val},
                                      std::pair{"test.jsonl", &ds.test}}) {
        write_instances(*split, dir / name);
        hashes[name] = sha256_file(dir / name);
    }
    nlohmann::json manifest = ds.manifest;
    manifest["config_hash"] = config_hash;
    manifest["files"] = hashes;
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    hashes["manifest.json"] = sha256_file(dir / "manifest.json");
    return hashes;
}

Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error(ErrorCode::missing_stage, "no manifest in " + dir.string());
    Dataset ds;
    try {
        ds.manifest = nlohmann::json::parse(in).get<DatasetManifest>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::data_error, (dir / "manifest.json").string() + ": " + e.what());
    }
    ds.train = read_instances(dir / "train.jsonl");
    ds.val = read_instances(dir / "val.jsonl");
    ds.test = read_instances(dir / "test.jsonl");
    return ds;
}

}  // namespace pcc
