#include "pcc/java_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace pcc {

std::string_view to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::identifier: return "identifier";
        case TokenKind::keyword: return "keyword";
        case TokenKind::string_literal: return "string-literal";
        case TokenKind::char_literal: return "char-literal";
        case TokenKind::number_literal: return "number-literal";
        case TokenKind::op: return "operator";
        case TokenKind::separator: return "separator";
        case TokenKind::comment: return "comment";
        case TokenKind::whitespace: return "whitespace";
    }
    return "unknown";
}

bool is_java_keyword(std::string_view word) {
    // Sorted for binary search. true/false/null are reserved literals and
    // are kept with the keywords.
    static constexpr std::array<std::string_view, 53> keywords = {
        "abstract", "assert",     "boolean",   "break",      "byte",      "case",         "catch",
        "char",     "class",      "const",     "continue",   "default",   "do",           "double",
        "else",     "enum",       "extends",   "false",      "final",     "finally",      "float",
        "for",      "goto",       "if",        "implements", "import",    "instanceof",   "int",
        "interface", "long",      "native",    "new",        "null",      "package",      "private",
        "protected", "public",    "return",    "short",      "static",    "strictfp",     "super",
        "switch",   "synchronized", "this",    "throw",      "throws",    "transient",    "true",
        "try",      "void",       "volatile",  "while"};
    return std::binary_search(keywords.begin(), keywords.end(), word);
}

namespace {

constexpr std::array<std::string_view, 4> four_or_three_char_ops = {">>>=", "<<=", ">>=", ">>>"};
constexpr std::array<std::string_view, 19> two_char_ops = {"->", "++", "--", "&&", "||", "==", "!=",
                                                           "<=", ">=", "+=", "-=", "*=", "/=", "&=",
                                                           "|=", "^=", "%=", "<<", ">>"};

bool is_ascii_ident_start(unsigned char c) { return std::isalpha(c) != 0 || c == '_' || c == '$'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex(unsigned char c) { return std::isxdigit(c) != 0; }

// Decodes one UTF-8 code point at `i`; returns its length, or 0 when invalid.
std::size_t decode(std::string_view s, std::size_t i, char32_t& cp) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
        cp = c;
        return 1;
    }
    if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
        len = 4;
        cp = c & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    return len;
}

bool is_unicode_ident_part(char32_t cp) {
    if (cp < 0xC0 || cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xE000 && cp <= 0xF8FF) return false;
    if (cp >= 0xFE00 && cp <= 0xFE0F) return false;
    if (cp >= 0x1F000) return false;  // emoji and pictographs
    return true;
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<SourceToken> run() {
        while (pos_ < src_.size()) step();
        return std::move(tokens_);
    }

private:
    [[nodiscard]] unsigned char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : 0;
    }

    void emit(TokenKind kind, std::size_t start) {
        tokens_.push_back(SourceToken{kind, std::string(src_.substr(start, pos_ - start)), line_, start});
        line_ += static_cast<std::size_t>(std::count(src_.begin() + static_cast<std::ptrdiff_t>(start),
                                                     src_.begin() + static_cast<std::ptrdiff_t>(pos_), '\n'));
    }

    // Length of the identifier character at pos_, 0 if none.
    [[nodiscard]] std::size_t ident_char_len(bool start) const {
        unsigned char c = peek();
        if (c < 0x80) return (is_ascii_ident_start(c) || (!start && is_digit(c))) ? 1 : 0;
        char32_t cp = 0;
        std::size_t len = decode(src_, pos_, cp);
        return (len != 0 && is_unicode_ident_part(cp)) ? len : 0;
    }

    void step() {
        std::size_t start = pos_;
        unsigned char c = peek();

        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
            while (pos_ < src_.size() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r' || peek() == '\f')) ++pos_;
            emit(TokenKind::whitespace, start);
            return;
        }
        if (c == '/' && peek(1) == '/') {
            while (pos_ < src_.size() && peek() != '\n') ++pos_;
            emit(TokenKind::comment, start);
            return;
        }
        if (c == '/' && peek(1) == '*') {
            auto close = src_.find("*/", pos_ + 2);
            pos_ = close == std::string_view::npos ? src_.size() : close + 2;
            emit(TokenKind::comment, start);
            return;
        }
        if (std::size_t len = ident_char_len(true); len != 0) {
            pos_ += len;
            while (pos_ < src_.size()) {
                std::size_t l = ident_char_len(false);
                if (l == 0) break;
                pos_ += l;
            }
            emit(is_java_keyword(src_.substr(start, pos_ - start)) ? TokenKind::keyword : TokenKind::identifier, start);
            return;
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
            number();
            emit(TokenKind::number_literal, start);
            return;
        }
        if (c == '"') {
            if (peek(1) == '"' && peek(2) == '"') {
                text_block();
            } else {
                quoted('"');
            }
            emit(TokenKind::string_literal, start);
            return;
        }
        if (c == '\'') {
            quoted('\'');
            emit(TokenKind::char_literal, start);
            return;
        }
        if (src_.substr(pos_, 3) == "...") {
            pos_ += 3;
            emit(TokenKind::separator, start);
            return;
        }
        if (src_.substr(pos_, 2) == "::") {
            pos_ += 2;
            emit(TokenKind::separator, start);
            return;
        }
        if (std::string_view("(){}[];,.@").find(static_cast<char>(c)) != std::string_view::npos && c != 0) {
            ++pos_;
            emit(TokenKind::separator, start);
            return;
        }
        for (auto op : four_or_three_char_ops) {
            if (src_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                emit(TokenKind::op, start);
                return;
            }
        }
        for (auto op : two_char_ops) {
            if (src_.substr(pos_, 2) == op) {
                pos_ += 2;
                emit(TokenKind::op, start);
                return;
            }
        }
        // Single-character operators and anything unknown (one code point,
        // or one byte when the input is not valid UTF-8).
        char32_t cp = 0;
        std::size_t len = c < 0x80 ? 1 : decode(src_, pos_, cp);
        pos_ += len == 0 ? 1 : len;
        emit(TokenKind::op, start);
    }

    void number() {
        auto digits = [this](auto pred) {
            while (pos_ < src_.size() && (pred(peek()) || peek() == '_')) ++pos_;
        };
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            pos_ += 2;
            digits(is_hex);
            if (peek() == '.') {
                ++pos_;
                digits(is_hex);
            }
            if (peek() == 'p' || peek() == 'P') exponent();
        } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
            pos_ += 2;
            digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
        } else {
            digits(is_digit);
            if (peek() == '.' && is_digit(peek(1))) {
                ++pos_;
                digits(is_digit);
            } else if (peek() == '.' && !is_ascii_ident_start(peek(1)) && peek(1) != '.') {
                ++pos_;  // "1." is a valid double literal
            }
            if (peek() == 'e' || peek() == 'E') exponent();
        }
        if (std::string_view("lLfFdD").find(static_cast<char>(peek())) != std::string_view::npos && peek() != 0) ++pos_;
    }

    void exponent() {
        std::size_t save = pos_;
        ++pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
        if (!is_digit(peek())) {
            pos_ = save;
            return;
        }
        while (pos_ < src_.size() && (is_digit(peek()) || peek() == '_')) ++pos_;
    }

    // Runs to the closing quote; an unterminated literal stops at end of line.
    void quoted(char quote) {
        ++pos_;
        while (pos_ < src_.size()) {
            unsigned char ch = peek();
            if (ch == '\\' && pos_ + 1 < src_.size() && peek(1) != '\n') {
                pos_ += 2;
                continue;
            }
            if (ch == '\n') return;
            ++pos_;
            if (ch == static_cast<unsigned char>(quote)) return;
        }
    }

    void text_block() {
        pos_ += 3;
        while (pos_ < src_.size()) {
            if (peek() == '\\' && pos_ + 1 < src_.size()) {
                pos_ += 2;
                continue;
            }
            if (src_.substr(pos_, 3) == "\"\"\"") {
                pos_ += 3;
                return;
            }
            ++pos_;
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::vector<SourceToken> tokens_;
};

}  // namespace

std::vector<SourceToken> lex(std::string_view source) { return Lexer(source).run(); }

std::vector<SourceToken> significant_tokens(std::string_view source) {
    auto all = lex(source);
    std::erase_if(all, [](const SourceToken& t) { return !t.significant(); });
    return all;
}

std::vector<std::string> token_texts(std::string_view source) {
    std::vector<std::string> out;
    for (auto& t : lex(source)) {
        if (t.significant()) out.push_back(std::move(t.text));
    }
    return out;
}

}  // namespace pcc
