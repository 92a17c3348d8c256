#include "pcc/identity.hpp"

#include "pcc/error.hpp"
#include "pcc/hash.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_map>

namespace pcc {

void to_json(nlohmann::json& j, const AuthorIdentity& a) {
    nlohmann::json aliases = nlohmann::json::array();
    for (const auto& [name, email] : a.aliases) aliases.push_back({{"name", name}, {"email", email}});
    j = nlohmann::json{{"author_id", a.author_id}, {"aliases", aliases}, {"added_lines_total", a.added_lines_total}};
}

void from_json(const nlohmann::json& j, AuthorIdentity& a) {
    j.at("author_id").get_to(a.author_id);
    j.at("added_lines_total").get_to(a.added_lines_total);
    a.aliases.clear();
    for (const auto& al : j.at("aliases")) a.aliases.emplace(al.at("name").get<std::string>(), al.at("email").get<std::string>());
}

IdentityOverrides load_overrides(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_error, "cannot read override file " + path.string());
    IdentityOverrides out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("name") || !j.contains("email") || !j.contains("author_id")) {
            throw Error(ErrorCode::config_error, "malformed override line: " + line);
        }
        out[{j["name"].get<std::string>(), j["email"].get<std::string>()}] = j["author_id"].get<std::string>();
    }
    return out;
}

namespace {

// ASCII folding for U+0100..U+017F (Latin Extended-A).
constexpr std::string_view latin_ext_a =
    "AaAaAaCcCcCcCcDd"
    "DdEeEeEeEeEeGgGg"
    "GgHhHhIiIiIiIiIi"
    "IiJjJjKkkLlLlLlL"
    "lLlNnNnNnnNnOoOo"
    "OoOoRrRrRrSsSsSs"
    "SsTtTtTtUuUuUuUu"
    "UuUuWwYyYZzZzZzs";

std::string fold_code_point(char32_t cp) {
    if (cp < 0x80) return std::string(1, static_cast<char>(cp));
    if (cp >= 0x100 && cp <= 0x17F) return std::string(1, latin_ext_a[cp - 0x100]);
    switch (cp) {
        case 0xC6: case 0xE6: return "ae";
        case 0xDE: case 0xFE: return "th";
        case 0xDF: return "ss";
        case 0xD0: case 0xF0: return "d";
        case 0xD7: case 0xF7: return " ";
        default: break;
    }
    if (cp >= 0xC0 && cp <= 0xFF) {
        // Latin-1 letters; lowercase block mirrors uppercase at +0x20.
        char32_t u = cp >= 0xE0 ? cp - 0x20 : cp;
        if (u <= 0xC5) return "a";
        if (u == 0xC7) return "c";
        if (u <= 0xCB) return "e";
        if (u <= 0xCF) return "i";
        if (u == 0xD1) return "n";
        if (u <= 0xD8) return "o";
        if (u <= 0xDC) return "u";
        return "y";
    }
    if (cp >= 0x80 && cp < 0xC0) return " ";
    // Keep other scripts verbatim, re-encoded as UTF-8.
    std::string out;
    if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Local parts that many unrelated people share.
bool is_generic_local_part(std::string_view local) {
    static constexpr std::array<std::string_view, 8> generic = {"noreply", "no-reply", "nobody", "unknown",
                                                                  "admin", "root", "users", "invalid"};
    return std::find(generic.begin(), generic.end(), local) != generic.end();
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Smaller index becomes the root so results do not depend on merge order.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::string normalize_person_name(std::string_view name) {
    std::string folded;
    std::size_t i = 0;
    while (i < name.size()) {
        auto c = static_cast<unsigned char>(name[i]);
        char32_t cp = c;
        std::size_t len = 1;
        if (c >= 0xF0 && i + 3 < name.size()) {
            cp = ((c & 0x07u) << 18) | ((name[i + 1] & 0x3Fu) << 12) | ((name[i + 2] & 0x3Fu) << 6) | (name[i + 3] & 0x3Fu);
            len = 4;
        } else if (c >= 0xE0 && i + 2 < name.size()) {
            cp = ((c & 0x0Fu) << 12) | ((name[i + 1] & 0x3Fu) << 6) | (name[i + 2] & 0x3Fu);
            len = 3;
        } else if (c >= 0xC0 && i + 1 < name.size()) {
            cp = ((c & 0x1Fu) << 6) | (name[i + 1] & 0x3Fu);
            len = 2;
        }
        folded += fold_code_point(cp);
        i += len;
    }

    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : folded) {
        if (std::isspace(c) || c == ',' || c == '.' || c == '_' || c == '-') {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else if (c >= 0x80 || std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    std::sort(tokens.begin(), tokens.end());

    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::vector<AuthorIdentity> resolve_identities(const std::vector<RawAuthor>& raw_authors,
                                               const IdentityOverrides& overrides) {
    // Distinct aliases in sorted order make every later step input-order free.
    std::map<Alias, std::uint64_t> lines_by_alias;
    for (const auto& r : raw_authors) lines_by_alias[{r.name, r.email}] += r.added_lines;

    std::vector<Alias> aliases;
    std::vector<std::uint64_t> lines;
    for (const auto& [alias, n] : lines_by_alias) {
        aliases.push_back(alias);
        lines.push_back(n);
    }

    DisjointSets sets(aliases.size());
    std::unordered_map<std::string, std::size_t> first_by_key;
    auto link = [&](const std::string& key, std::size_t idx) {
        auto [it, fresh] = first_by_key.try_emplace(key, idx);
        if (!fresh) sets.unite(it->second, idx);
    };

    for (std::size_t i = 0; i < aliases.size(); ++i) {
        const auto& [name, email] = aliases[i];
        if (auto forced = overrides.find(aliases[i]); forced != overrides.end()) {
            link("forced\x1f" + forced->second, i);
            continue;
        }
        std::string mail = lower_ascii(email);
        if (!mail.empty()) link("email\x1f" + mail, i);
        auto at = mail.find('@');
        std::string local = mail.substr(0, at);
        if (at != std::string::npos && local.size() >= 5 && !is_generic_local_part(local)) {
            link("local\x1f" + local, i);
        }
        std::string norm = normalize_person_name(name);
        if (!norm.empty()) link("name\x1f" + norm, i);
    }

    std::map<std::size_t, AuthorIdentity> groups;
    for (std::size_t i = 0; i < aliases.size(); ++i) {
        auto& g = groups[sets.find(i)];
        g.aliases.insert(aliases[i]);
        g.added_lines_total += lines[i];
    }

    std::vector<AuthorIdentity> out;
    out.reserve(groups.size());
    for (auto& [root, g] : groups) {
        const Alias& first = *g.aliases.begin();
        if (auto forced = overrides.find(first); forced != overrides.end()) {
            g.author_id = forced->second;
        } else {
            g.author_id = "dev-" + hash_fields({lower_ascii(first.second), first.first}).substr(0, 12);
        }
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.author_id < b.author_id; });
    return out;
}

std::vector<AuthorIdentity> top_contributors(std::vector<AuthorIdentity> identities, std::size_t k) {
    std::sort(identities.begin(), identities.end(), [](const auto& a, const auto& b) {
        if (a.added_lines_total != b.added_lines_total) return a.added_lines_total > b.added_lines_total;
        return a.author_id < b.author_id;
    });
    if (identities.size() > k) identities.resize(k);
    return identities;
}

std::map<Alias, std::string> alias_index(const std::vector<AuthorIdentity>& identities) {
    std::map<Alias, std::string> out;
    for (const auto& id : identities) {
        for (const auto& alias : id.aliases) out[alias] = id.author_id;
    }
    return out;
}

}  // namespace pcc
