#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pcc {

struct RawAuthor {
    std::string name;
    std::string email;
    std::uint64_t added_lines = 0;
};

using Alias = std::pair<std::string, std::string>;  // (name, email)

struct AuthorIdentity {
    std::string author_id;
    std::set<Alias> aliases;
    std::uint64_t added_lines_total = 0;
};

void to_json(nlohmann::json& j, const AuthorIdentity& a);
void from_json(const nlohmann::json& j, AuthorIdentity& a);

/// Forced identities keyed by exact (name, email). These stand in for a
/// manual review pass over automatic matches.
using IdentityOverrides = std::map<Alias, std::string>;

/// Reads the JSONL override file: one {"name", "email", "author_id"} per line.
IdentityOverrides load_overrides(const std::filesystem::path& path);

/// Lowercase, diacritics folded to ASCII, punctuation dropped, tokens sorted.
std::string normalize_person_name(std::string_view name);

/// Merges aliases with union-find. Two aliases join when they share the full
/// email (case-insensitive), an email local part of length >= 5, or a
/// normalized name. Aliases named in `overrides` skip the rules and are
/// grouped by their forced id. Output is sorted by author_id and does not
/// depend on input order.
std::vector<AuthorIdentity> resolve_identities(const std::vector<RawAuthor>& raw_authors,
                                               const IdentityOverrides& overrides = {});

/// The k identities with the most added lines; ties by author_id ascending.
std::vector<AuthorIdentity> top_contributors(std::vector<AuthorIdentity> identities, std::size_t k);

/// Maps every alias to its identity's author_id.
std::map<Alias, std::string> alias_index(const std::vector<AuthorIdentity>& identities);

}  // namespace pcc
