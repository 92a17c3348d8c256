#include "corpus.hpp"

#include "git_builder.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace pcc::fixtures {

namespace {

constexpr std::int64_t kOrgStart = 1600000000;

struct Person {
    std::string name;
    std::string email;
    std::vector<std::string> words;  // vocabulary the person's code draws on
    std::vector<std::string> stems;  // method name stems
};

struct JMethod {
    std::string name;
    std::vector<std::string> body;
};

struct JFile {
    std::string package;
    std::string cls;
    std::vector<JMethod> methods;

    [[nodiscard]] std::string render() const {
        std::string out = "package " + package + ";\n\npublic class " + cls + " {\n";
        for (const auto& m : methods) {
            out += "\n    public int " + m.name + "(int limit, String key) {\n";
            for (const auto& line : m.body) out += "        " + line + "\n";
            out += "    }\n";
        }
        out += "}\n";
        return out;
    }
};

class StatementBank {
public:
    explicit StatementBank(std::mt19937_64& rng) : rng_(rng) {}

    std::vector<std::string> draw(const Person& who) {
        const auto& w = who.words[rng_() % who.words.size()];
        auto n = std::to_string(1 + rng_() % 9);
        auto v = std::to_string(next_var_++);
        switch (rng_() % 6) {
            case 0: return {"int " + w + v + " = " + w + "Count(limit, " + n + ");", "total += " + w + v + " * " + n + ";"};
            case 1: return {"if (key.length() > " + n + ") {", "    total -= " + w + "Offset(" + n + ");", "}"};
            case 2: return {"String label" + v + " = key + \"" + w + "\";", "total += label" + v + ".length();"};
            case 3: return {"for (int i = 0; i < limit; i++) {", "    total += i % " + n + ";", "}"};
            case 4: return {w + "Registry.record(key, total + " + n + ");"};
            default:
                return {"long stamp" + v + " = " + w + "Clock.now() + " + n + "L;",
                        "total += (int) (stamp" + v + " % " + std::to_string(std::stoi(n) + 1) + ");"};
        }
    }

    JMethod method(const Person& who, std::size_t serial) {
        JMethod m;
        m.name = who.stems[rng_() % who.stems.size()] + (rng_() % 3 == 0 ? "" : std::to_string(serial));
        m.body.push_back("int total = 0;");
        std::size_t count = 2 + rng_() % 3;
        for (std::size_t i = 0; i < count; ++i) {
            for (auto& line : draw(who)) m.body.push_back(std::move(line));
        }
        m.body.push_back("return total;");
        return m;
    }

private:
    std::mt19937_64& rng_;
    std::size_t next_var_ = 0;
};

struct Contributor {
    Person person;
    std::string file;  // the class this contributor mostly works on
    unsigned weight = 1;
};

// Replays a scripted history: every commit adds a method to, or extends a
// method in, exactly one file.
class OrgHistory {
public:
    OrgHistory(GitBuilder& git, std::string package, std::mt19937_64& rng)
        : git_(git), package_(std::move(package)), rng_(rng), bank_(rng) {}

    std::int64_t ts = kOrgStart;

    void step(const Contributor& c) {
        auto& file = files_[c.file];
        if (file.cls.empty()) {
            file.package = package_;
            file.cls = c.file;
        }
        std::string message;
        if (file.methods.empty() || rng_() % 5 < 3) {
            file.methods.push_back(bank_.method(c.person, ++serial_));
            message = "Add " + file.methods.back().name;
        } else {
            auto& m = file.methods[rng_() % file.methods.size()];
            auto lines = bank_.draw(c.person);
            m.body.insert(m.body.end() - 1, lines.begin(), lines.end());
            message = "Extend " + m.name;
        }
        commit(c.person, message, c.file);
    }

    void commit(const Person& who, const std::string& message, const std::string& cls) {
        git_.write(path_of(cls), files_[cls].render());
        ts += 3000 + static_cast<std::int64_t>(rng_() % 5000);
        git_.commit(who.name, who.email, ts, message);
    }

    JFile& file(const std::string& cls) {
        auto& f = files_[cls];
        if (f.cls.empty()) {
            f.package = package_;
            f.cls = cls;
        }
        return f;
    }

    StatementBank& bank() { return bank_; }
    std::size_t next_serial() { return ++serial_; }

    [[nodiscard]] std::string path_of(const std::string& cls) const {
        std::string dir = package_;
        for (auto& ch : dir) {
            if (ch == '.') ch = '/';
        }
        return "src/main/java/" + dir + "/" + cls + ".java";
    }

private:
    GitBuilder& git_;
    std::string package_;
    std::mt19937_64& rng_;
    StatementBank bank_;
    std::map<std::string, JFile> files_;
    std::size_t serial_ = 0;
};

const Contributor& pick(const std::vector<Contributor>& cs, std::mt19937_64& rng) {
    unsigned total = 0;
    for (const auto& c : cs) total += c.weight;
    auto r = static_cast<unsigned>(rng() % total);
    for (const auto& c : cs) {
        if (r < c.weight) return c;
        r -= c.weight;
    }
    return cs.back();
}

Person alice() {
    return {"Alice Moreau", "alice.moreau@acme.example", {"cache", "loader", "entry", "evict"}, {"loadEntry", "evictStale", "warmCache", "cacheSize"}};
}
Person alice_alias() {
    auto p = alice();
    p.name = "alice moreau";
    p.email = "amoreau@users.noreply.example";
    return p;
}
Person bob() {
    return {"Bob Tanaka", "bob.tanaka@acme.example", {"token", "parser", "lexeme", "cursor"}, {"parseToken", "nextLexeme", "skipBlank", "cursorAt"}};
}
Person chen() {
    return {"Chen Wei", "chen.wei@acme.example", {"metric", "report", "gauge", "sample"}, {"recordMetric", "flushReport", "gaugeValue", "sampleRate"}};
}
Person dana() {
    return {"Dana Light", "dana@light.example", {"config", "option"}, {"readOption", "configFlag"}};
}
Person bot() { return {"dependabot[bot]", "bot@deps.example", {"version"}, {"bumpVersion"}}; }

void build_core(const std::filesystem::path& dir, std::mt19937_64& rng) {
    GitBuilder git(dir);
    OrgHistory h(git, "com.acme.core", rng);
    std::vector<Contributor> team{{alice(), "CacheStore", 5}, {bob(), "TokenParser", 4}, {dana(), "Settings", 1}};
    for (int i = 0; i < 70; ++i) {
        h.step(pick(team, rng));
        if (i == 20) {
            // A bulk documentation commit: far above the files-changed threshold.
            for (int k = 0; k < 40; ++k) git.write("docs/note" + std::to_string(k) + ".md", "note " + std::to_string(k) + "\n");
            h.file("Settings").methods.push_back(h.bank().method(dana(), h.next_serial()));
            h.commit(dana(), "Reformat docs and settings", "Settings");
        }
        if (i == 35) {
            auto& f = h.file("Versions");
            f.methods.push_back(h.bank().method(bot(), h.next_serial()));
            h.commit(bot(), "Bump versions", "Versions");
        }
        if (i == 50) {
            git.write("src/main/java/com/acme/core/Blob.java", std::string("class Blob {\0\x01\x02 }\n", 18));
            h.ts += 1000;
            git.commit(bob().name, bob().email, h.ts, "Add generated blob");
        }
    }
}

void build_web(const std::filesystem::path& dir, std::mt19937_64& rng) {
    GitBuilder git(dir);
    OrgHistory h(git, "com.acme.web", rng);
    h.ts = kOrgStart + 1800;
    std::vector<Contributor> team{{chen(), "MetricsPage", 6}, {bob(), "RequestParser", 2}, {alice_alias(), "PageCache", 2}};
    for (int i = 0; i < 75; ++i) {
        h.step(pick(team, rng));
        if (i == 40) {
            git.checkout("feature", true);
            h.file("MetricsPage").methods.push_back(h.bank().method(chen(), h.next_serial()));
            h.commit(chen(), "Add dashboard metric", "MetricsPage");
            git.checkout("main");
            h.ts += 600;
            git.merge("feature", chen().name, chen().email, h.ts);
        }
    }
}

void build_outside(const std::filesystem::path& dir, std::mt19937_64& rng) {
    GitBuilder git(dir);
    std::vector<Person> people{
        {"Erin Walsh", "erin@outside.example", {"buffer", "node", "graph", "cache"}, {"visitNode", "fillBuffer", "graphDepth"}},
        {"Farid Haddad", "farid@outside.example", {"stream", "queue", "matrix", "token"}, {"drainQueue", "streamSize", "matrixRank"}}};
    StatementBank bank(rng);
    std::size_t serial = 0;
    for (int f = 0; f < 20; ++f) {
        const auto& who = people[static_cast<std::size_t>(f) % people.size()];
        JFile file{"org.outside.lib", "Component" + std::to_string(f), {}};
        for (int m = 0; m < 8; ++m) file.methods.push_back(bank.method(who, ++serial));
        git.write("src/org/outside/lib/" + file.cls + ".java", file.render());
        git.commit(who.name, who.email, kOrgStart - 30 * 86400 + f * 86400, "Add " + file.cls);
    }
}

}  // namespace

void build_fixture_corpus(const std::filesystem::path& dir) {
    std::mt19937_64 rng(20240917);
    build_core(dir / "repos" / "acme-core", rng);
    build_web(dir / "repos" / "acme-web", rng);
    build_outside(dir / "repos" / "outside-lib", rng);

    nlohmann::json config{
        {"organization", "acme"},
        {"seed", 7},
        {"repos", {{{"id", "acme-core"}, {"path", "repos/acme-core"}, {"branch", "main"}},
                   {{"id", "acme-web"}, {"path", "repos/acme-web"}, {"branch", "main"}}}},
        {"generic_repos", {{{"id", "outside-lib"}, {"path", "repos/outside-lib"}, {"branch", "main"}}}},
        {"caps", {{"top_contributors", 1000}, {"top_developers", 100}, {"methods_per_repo", 120}, {"test_size", 20},
                  {"min_train", 40}}},
        {"crystal_bleu", {{"k", 500}, {"max_order", 4}}},
        {"mask_lengths", {{"mean", 11.0}, {"median", 8.0}, {"min", 3}, {"max", 50}}}};
    std::ofstream(dir / "config.json", std::ios::binary) << config.dump(2) << '\n';
}

std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        out[std::filesystem::relative(entry.path(), dir).generic_string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return out;
}

}  // namespace pcc::fixtures
