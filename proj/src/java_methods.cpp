#include "pcc/java_methods.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

namespace pcc {

std::string_view to_string(FilterReason reason) {
    switch (reason) {
        case FilterReason::ok: return "ok";
        case FilterReason::unparsable: return "unparsable";
        case FilterReason::test_name: return "test-name";
        case FilterReason::empty_or_comment_body: return "empty-or-comment-body";
        case FilterReason::too_short: return "too-short";
        case FilterReason::too_long: return "too-long";
        case FilterReason::non_latin: return "non-latin";
    }
    return "unknown";
}

std::size_t MethodUnit::tokens_on_line(std::size_t line) const {
    return static_cast<std::size_t>(
        std::count_if(tokens.begin(), tokens.end(), [line](const SourceToken& t) { return t.line == line; }));
}

namespace {

enum class ScopeKind { file, type_body, method_body, block };

struct Scope {
    ScopeKind kind = ScopeKind::file;
    bool enum_constants = false;  // inside an enum body, before its first ';'
};

bool is(const SourceToken& t, std::string_view text) { return t.text == text; }

class MethodFinder {
public:
    MethodFinder(std::string_view source, std::vector<SourceToken> tokens)
        : src_(source), t_(std::move(tokens)), match_(t_.size(), npos) {}

    std::vector<MethodUnit> run() {
        if (!match_pairs()) return {};
        std::vector<Scope> scopes{Scope{}};
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const auto& tok = t_[i];
            if (is(tok, "{")) {
                scopes.push_back(open_scope(i, scopes.back()));
            } else if (is(tok, "}")) {
                scopes.pop_back();
            } else if (is(tok, ";") && scopes.back().enum_constants) {
                scopes.back().enum_constants = false;
            }
        }
        std::sort(methods_.begin(), methods_.end(), [](const MethodUnit& a, const MethodUnit& b) {
            return a.start_offset < b.start_offset;
        });
        return std::move(methods_);
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    // Braces must balance for the file to count as parsable. Parentheses and
    // brackets are matched best-effort.
    bool match_pairs() {
        std::vector<std::size_t> braces;
        std::vector<std::size_t> parens;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const auto& s = t_[i].text;
            if (t_[i].kind != TokenKind::separator) continue;
            if (s == "{") {
                braces.push_back(i);
            } else if (s == "}") {
                if (braces.empty()) return false;
                match_[braces.back()] = i;
                match_[i] = braces.back();
                braces.pop_back();
            } else if (s == "(") {
                parens.push_back(i);
            } else if (s == ")" && !parens.empty()) {
                match_[parens.back()] = i;
                match_[i] = parens.back();
                parens.pop_back();
            }
        }
        return braces.empty();
    }

    Scope open_scope(std::size_t brace, const Scope& enclosing) {
        if (enclosing.kind == ScopeKind::type_body && enclosing.enum_constants) {
            // Enum constant bodies: `A(1) { ... }` or `A { ... }`.
            return Scope{ScopeKind::type_body, false};
        }
        if (enclosing.kind == ScopeKind::type_body) {
            if (auto m = method_at(brace)) {
                methods_.push_back(std::move(*m));
                return Scope{ScopeKind::method_body, false};
            }
        }
        if (auto type = type_header_before(brace)) return Scope{ScopeKind::type_body, *type == "enum"};
        return Scope{ScopeKind::block, false};
    }

    // Keyword that introduces the type body opened at `brace`, if any.
    std::optional<std::string> type_header_before(std::size_t brace) const {
        if (brace == 0) return std::nullopt;
        std::size_t j = brace - 1;
        if (is(t_[j], ")") && match_[j] != npos) {
            // Anonymous class: new Type<...>(args) {
            std::size_t k = match_[j];
            while (k > 0) {
                --k;
                const auto& tk = t_[k];
                if (is(tk, "new")) return std::string("new");
                if (tk.kind == TokenKind::identifier || is(tk, ".") || is(tk, "<") || is(tk, ">") || is(tk, ">>") ||
                    is(tk, ",") || is(tk, "?") || is(tk, "[") || is(tk, "]")) {
                    continue;
                }
                break;
            }
        }
        for (;;) {
            const auto& tk = t_[j];
            if (is(tk, ";") || is(tk, "{") || is(tk, "}")) return std::nullopt;
            if (is(tk, ")") && match_[j] != npos) {
                j = match_[j];
            } else if (is(tk, "class") || is(tk, "interface") || is(tk, "enum")) {
                return tk.text;
            } else if (tk.kind == TokenKind::identifier && tk.text == "record" && j + 1 < brace &&
                       t_[j + 1].kind == TokenKind::identifier) {
                return tk.text;
            }
            if (j == 0) return std::nullopt;
            --j;
        }
    }

    std::optional<MethodUnit> method_at(std::size_t brace) const {
        if (brace < 3) return std::nullopt;
        std::size_t j = brace - 1;

        // Skip a throws clause.
        for (std::size_t k = j; k > 0; --k) {
            const auto& tk = t_[k];
            if (is(tk, "throws")) {
                j = k - 1;
                break;
            }
            if (tk.kind == TokenKind::identifier || is(tk, ".") || is(tk, ",") || is(tk, "<") || is(tk, ">") ||
                is(tk, ">>") || is(tk, "?") || is(tk, "@")) {
                continue;
            }
            break;
        }

        if (!is(t_[j], ")") || match_[j] == npos) return std::nullopt;
        std::size_t open = match_[j];
        if (open < 1) return std::nullopt;
        const auto& name = t_[open - 1];
        if (name.kind != TokenKind::identifier) return std::nullopt;
        if (open >= 2) {
            const auto& before = t_[open - 2];
            bool generic_close = is(before, ">") || is(before, ">>") || is(before, ">>>");
            if (is(before, "new") || is(before, ".") || (before.kind == TokenKind::op && !generic_close)) {
                return std::nullopt;
            }
            if (before.kind == TokenKind::identifier && before.text == "record") return std::nullopt;
            if (is(before, "(") || is(before, ",")) return std::nullopt;
        }

        std::size_t start = declaration_start(open - 1);
        std::size_t close = match_[brace];

        MethodUnit m;
        m.name = name.text;
        m.signature = m.name + "(" + parameter_types(open, j) + ")";
        m.start_line = t_[start].line;
        m.end_line = t_[close].line;
        m.tokens.assign(t_.begin() + static_cast<std::ptrdiff_t>(start), t_.begin() + static_cast<std::ptrdiff_t>(close) + 1);
        m.body_token_count = close - brace - 1;
        m.start_offset = t_[start].offset;
        m.text = std::string(src_.substr(m.start_offset, t_[close].end() - m.start_offset));
        return m;
    }

    // First token of the declaration whose name sits at `name`: walks back to
    // the previous member boundary, stepping over parenthesized groups so that
    // annotation arguments stay attached.
    std::size_t declaration_start(std::size_t name) const {
        std::size_t j = name;
        while (j > 0) {
            const auto& prev = t_[j - 1];
            if (is(prev, ";") || is(prev, "{") || is(prev, "}")) break;
            if (is(prev, ")") && match_[j - 1] != npos) {
                j = match_[j - 1];
                continue;
            }
            --j;
        }
        return j;
    }

    std::string parameter_types(std::size_t open, std::size_t close) const {
        std::vector<std::vector<const SourceToken*>> params(1);
        int depth = 0;
        for (std::size_t k = open + 1; k < close; ++k) {
            const auto& tk = t_[k];
            if (is(tk, "(") || is(tk, "<") || is(tk, "[")) ++depth;
            if (is(tk, ")") || is(tk, ">") || is(tk, "]")) --depth;
            if (is(tk, ">>")) depth -= 2;
            if (is(tk, ">>>")) depth -= 3;
            if (is(tk, ",") && depth == 0) {
                params.emplace_back();
                continue;
            }
            params.back().push_back(&tk);
        }

        std::string out;
        bool first = true;
        for (auto& p : params) {
            auto type = parameter_type(p);
            if (!type) continue;
            if (!first) out += ',';
            out += *type;
            first = false;
        }
        return out;
    }

    static std::optional<std::string> parameter_type(const std::vector<const SourceToken*>& param) {
        std::vector<const SourceToken*> toks;
        for (std::size_t k = 0; k < param.size(); ++k) {
            const auto* tk = param[k];
            if (is(*tk, "@")) {
                // Drop `@Qualified.Name` and an optional argument list.
                ++k;
                while (k + 1 < param.size() && is(*param[k + 1], ".")) k += 2;
                if (k + 1 < param.size() && is(*param[k + 1], "(")) {
                    int depth = 0;
                    for (++k; k < param.size(); ++k) {
                        if (is(*param[k], "(")) ++depth;
                        if (is(*param[k], ")") && --depth == 0) break;
                    }
                }
                continue;
            }
            if (is(*tk, "final")) continue;
            toks.push_back(tk);
        }
        // Trailing dimensions after the name belong to the type: `int a[]`.
        std::string dims;
        while (toks.size() >= 2 && is(*toks.back(), "]") && is(*toks[toks.size() - 2], "[")) {
            dims += "[]";
            toks.resize(toks.size() - 2);
        }
        if (toks.size() < 2) return std::nullopt;
        if (is(*toks.back(), "this")) return std::nullopt;  // receiver parameter
        toks.pop_back();
        std::string type;
        for (const auto* tk : toks) type += tk->text;
        return type + dims;
    }

    std::string_view src_;
    std::vector<SourceToken> t_;
    std::vector<std::size_t> match_;
    std::vector<MethodUnit> methods_;
};

}  // namespace

std::vector<MethodUnit> extract_methods(std::string_view source) {
    return MethodFinder(source, significant_tokens(source)).run();
}

std::vector<std::string> split_identifier(std::string_view name) {
    std::vector<std::string> parts;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) parts.push_back(std::move(cur));
        cur.clear();
    };
    auto cls = [](unsigned char c) {
        if (std::isdigit(c)) return 'd';
        if (std::isupper(c)) return 'U';
        if (std::islower(c) || c >= 0x80) return 'l';
        return 's';
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        auto c = static_cast<unsigned char>(name[i]);
        char k = cls(c);
        if (k == 's') {
            flush();
            continue;
        }
        if (!cur.empty()) {
            char prev = cls(static_cast<unsigned char>(cur.back()));
            bool boundary = (prev == 'l' && k == 'U') || (prev == 'd') != (k == 'd');
            // End of an acronym: "HTTPServer" splits before the 'S'.
            if (!boundary && prev == 'U' && k == 'U' && i + 1 < name.size() &&
                cls(static_cast<unsigned char>(name[i + 1])) == 'l') {
                boundary = true;
            }
            if (boundary) flush();
        }
        cur += static_cast<char>(c);
    }
    flush();
    return parts;
}

bool is_latin_text(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if ((c < 0x20 || c == 0x7F) && c != '\t' && c != '\n' && c != '\r' && c != '\f') return false;
            ++i;
            continue;
        }
        // Two-byte sequences C2 A0..C3 BF cover U+00A0..U+00FF.
        if ((c == 0xC2 || c == 0xC3) && i + 1 < text.size()) {
            auto c2 = static_cast<unsigned char>(text[i + 1]);
            if ((c2 & 0xC0) != 0x80) return false;
            if (c == 0xC2 && c2 < 0xA0) return false;
            i += 2;
            continue;
        }
        return false;
    }
    return true;
}

FilterVerdict apply_method_filters(const MethodUnit& m, const MethodFilterLimits& limits) {
    auto drop = [](FilterReason r) { return FilterVerdict{false, r}; };

    int parens = 0;
    int brackets = 0;
    for (const auto& t : m.tokens) {
        if (t.kind != TokenKind::separator) continue;
        if (t.text == "(") ++parens;
        if (t.text == ")") --parens;
        if (t.text == "[") ++brackets;
        if (t.text == "]") --brackets;
        if (parens < 0 || brackets < 0) return drop(FilterReason::unparsable);
    }
    if (parens != 0 || brackets != 0 || m.tokens.empty()) return drop(FilterReason::unparsable);

    for (const auto& part : split_identifier(m.name)) {
        std::string lower(part);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "test") return drop(FilterReason::test_name);
    }
    if (m.body_token_count == 0) return drop(FilterReason::empty_or_comment_body);
    if (m.tokens.size() < limits.min_tokens) return drop(FilterReason::too_short);
    if (m.tokens.size() > limits.max_tokens) return drop(FilterReason::too_long);
    if (!is_latin_text(m.text)) return drop(FilterReason::non_latin);
    return {};
}

std::vector<std::pair<MethodUnit, std::vector<std::size_t>>> map_added_lines(const std::vector<MethodUnit>& methods,
                                                                             const std::vector<AddedLine>& lines) {
    std::map<std::size_t, std::set<std::size_t>> by_method;
    for (const auto& line : lines) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < methods.size(); ++i) {
            const auto& m = methods[i];
            if (line.line_number < m.start_line || line.line_number > m.end_line) continue;
            if (!best) {
                best = i;
                continue;
            }
            const auto& b = methods[*best];
            bool narrower = (m.end_line - m.start_line) < (b.end_line - b.start_line) ||
                            ((m.end_line - m.start_line) == (b.end_line - b.start_line) && m.start_offset > b.start_offset);
            if (narrower) best = i;
        }
        if (best) by_method[*best].insert(line.line_number);
    }
    std::vector<std::pair<MethodUnit, std::vector<std::size_t>>> out;
    for (const auto& [idx, set] : by_method) out.emplace_back(methods[idx], std::vector<std::size_t>(set.begin(), set.end()));
    return out;
}

}  // namespace pcc
