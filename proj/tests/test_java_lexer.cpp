#include "pcc/java_lexer.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pcc;

namespace {

std::vector<std::pair<TokenKind, std::string>> sig(std::string_view src) {
    std::vector<std::pair<TokenKind, std::string>> out;
    for (const auto& t : significant_tokens(src)) out.emplace_back(t.kind, t.text);
    return out;
}

std::string join(const std::vector<SourceToken>& tokens) {
    std::string out;
    for (const auto& t : tokens) out += t.text;
    return out;
}

}  // namespace

TEST(Lexer, SimpleDeclaration) {
    auto toks = sig("int a = 3;");
    std::vector<std::pair<TokenKind, std::string>> expected{{TokenKind::keyword, "int"},
                                                            {TokenKind::identifier, "a"},
                                                            {TokenKind::op, "="},
                                                            {TokenKind::number_literal, "3"},
                                                            {TokenKind::separator, ";"}};
    EXPECT_EQ(toks, expected);
    EXPECT_EQ(lex("int a = 3;").size(), 8u);  // plus three whitespace runs
}

TEST(Lexer, EmptySource) { EXPECT_TRUE(lex("").empty()); }

TEST(Lexer, StringLiteralIsOneToken) {
    auto toks = sig("String s = \"a b\";");
    ASSERT_EQ(toks.size(), 5u);
    EXPECT_EQ(toks[3].first, TokenKind::string_literal);
    EXPECT_EQ(toks[3].second, "\"a b\"");
}

TEST(Lexer, LiteralForms) {
    auto toks = sig(R"(x = 0x1F_FFL + 1_000 + 3.5e-2f + .5 + 0b1010 + 'c' + '\'' + "q\"uote" + 1.;)");
    std::vector<std::string> numbers;
    std::vector<std::string> chars;
    for (const auto& [k, t] : toks) {
        if (k == TokenKind::number_literal) numbers.push_back(t);
        if (k == TokenKind::char_literal) chars.push_back(t);
    }
    EXPECT_EQ(numbers, (std::vector<std::string>{"0x1F_FFL", "1_000", "3.5e-2f", ".5", "0b1010", "1."}));
    EXPECT_EQ(chars, (std::vector<std::string>{"'c'", "'\\''"}));
}

TEST(Lexer, TextBlock) {
    std::string src = "s = \"\"\"\n  hello \"x\"\n  \"\"\";";
    auto toks = sig(src);
    ASSERT_EQ(toks.size(), 4u);
    EXPECT_EQ(toks[2].first, TokenKind::string_literal);
}

TEST(Lexer, OperatorsLongestMatch) {
    auto toks = sig("a >>>= b >> c -> d :: e ... f != g");
    std::vector<std::string> ops;
    for (const auto& [k, t] : toks) {
        if (k == TokenKind::op || k == TokenKind::separator) ops.push_back(t);
    }
    EXPECT_EQ(ops, (std::vector<std::string>{">>>=", ">>", "->", "::", "...", "!="}));
}

TEST(Lexer, CommentsAndLines) {
    auto toks = lex("a // one\n/* two\nthree */ b");
    ASSERT_EQ(toks.size(), 7u);
    EXPECT_EQ(toks[2].kind, TokenKind::comment);
    EXPECT_EQ(toks[2].text, "// one");
    EXPECT_EQ(toks[4].kind, TokenKind::comment);
    EXPECT_EQ(toks[4].line, 2u);
    EXPECT_EQ(toks[6].text, "b");
    EXPECT_EQ(toks[6].line, 3u);
}

TEST(Lexer, UnknownCharactersBecomeOperators) {
    auto toks = sig("a # b \\ c");
    ASSERT_EQ(toks.size(), 5u);
    EXPECT_EQ(toks[1], (std::pair{TokenKind::op, std::string("#")}));
    EXPECT_EQ(toks[3], (std::pair{TokenKind::op, std::string("\\")}));
    auto emoji = sig("x\xF0\x9F\x98\x80y");
    ASSERT_EQ(emoji.size(), 3u);
    EXPECT_EQ(emoji[1].first, TokenKind::op);
}

TEST(Lexer, KeywordsVersusIdentifiers) {
    auto toks = sig("public var record yield null");
    EXPECT_EQ(toks[0].first, TokenKind::keyword);
    EXPECT_EQ(toks[1].first, TokenKind::identifier);
    EXPECT_EQ(toks[2].first, TokenKind::identifier);
    EXPECT_EQ(toks[4].first, TokenKind::keyword);
}

TEST(Lexer, UnterminatedConstructsStillCoverInput) {
    for (std::string src : {"\"abc", "/* open", "'x", "\"\"\"never", "a\\", "\"esc\\"}) {
        EXPECT_EQ(join(lex(src)), src);
    }
}

TEST(Lexer, RoundTripFuzz) {
    std::mt19937 rng(42);
    const std::string alphabet = "abcXYZ019_$ \t\n\r{}()[];,.@=<>!~?:+-*/&|^%'\"\\#`\x01\xc3\xa9\xf0\x9f\x98\x80\xff";
    for (int iter = 0; iter < 5000; ++iter) {
        std::string src;
        std::size_t n = rng() % 80;
        for (std::size_t i = 0; i < n; ++i) src += alphabet[rng() % alphabet.size()];
        auto toks = lex(src);
        ASSERT_EQ(join(toks), src);
        std::size_t offset = 0;
        for (const auto& t : toks) {
            ASSERT_FALSE(t.text.empty());
            ASSERT_EQ(t.offset, offset);
            offset += t.text.size();
        }
    }
}
