#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

enum class TokenKind {
    identifier,
    keyword,
    string_literal,
    char_literal,
    number_literal,
    op,
    separator,
    comment,
    whitespace,
};

std::string_view to_string(TokenKind kind);

struct SourceToken {
    TokenKind kind = TokenKind::whitespace;
    std::string text;
    std::size_t line = 1;    // 1-based line of the first character
    std::size_t offset = 0;  // byte offset into the lexed source

    [[nodiscard]] bool significant() const noexcept {
        return kind != TokenKind::comment && kind != TokenKind::whitespace;
    }
    [[nodiscard]] std::size_t end() const noexcept { return offset + text.size(); }
};

/// Total Java tokenizer: every byte of `source` lands in exactly one token,
/// so concatenating the token texts reproduces the input. Characters outside
/// the lexical grammar become single-character operator tokens.
std::vector<SourceToken> lex(std::string_view source);

/// lex() minus comments and whitespace.
std::vector<SourceToken> significant_tokens(std::string_view source);

/// Texts of the significant tokens, the unit every "token count" refers to.
std::vector<std::string> token_texts(std::string_view source);

bool is_java_keyword(std::string_view word);

}  // namespace pcc
