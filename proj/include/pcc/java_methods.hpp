#pragma once

#include "pcc/java_lexer.hpp"
#include "pcc/line_diff.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pcc {

/// A method or constructor declaration with a body, located in one file.
struct MethodUnit {
    std::string name;
    std::string signature;  // name(type,type,...) with whitespace stripped from types
    std::size_t start_line = 1;
    std::size_t end_line = 1;
    std::vector<SourceToken> tokens;  // significant tokens, file coordinates
    std::size_t body_token_count = 0;
    std::string text;               // source from the first declaration token to the closing brace
    std::size_t start_offset = 0;   // byte offset of `text` in the file

    /// Significant tokens whose first character sits on `line`.
    [[nodiscard]] std::size_t tokens_on_line(std::size_t line) const;
};

enum class FilterReason { ok, unparsable, test_name, empty_or_comment_body, too_short, too_long, non_latin };

std::string_view to_string(FilterReason reason);

struct FilterVerdict {
    bool kept = true;
    FilterReason reason = FilterReason::ok;
};

struct MethodFilterLimits {
    std::size_t min_tokens = 15;
    std::size_t max_tokens = 500;
};

/// Finds method and constructor declarations by their lexical shape inside
/// type bodies, including nested, local and anonymous classes. A source with
/// unbalanced braces is unparsable and yields nothing.
std::vector<MethodUnit> extract_methods(std::string_view source);

/// Splits camelCase, snake_case and letter/digit boundaries: "parseHTTPHeader2"
/// gives {"parse", "HTTP", "Header", "2"}.
std::vector<std::string> split_identifier(std::string_view name);

/// Characters allowed by the non-latin filter: ASCII printable, tab/newline/CR/FF
/// and the printable Latin-1 supplement.
bool is_latin_text(std::string_view text);

FilterVerdict apply_method_filters(const MethodUnit& m, const MethodFilterLimits& limits = {});

/// Assigns each added line to the innermost method whose span contains it.
/// Methods without added lines are omitted; line lists are sorted and unique.
std::vector<std::pair<MethodUnit, std::vector<std::size_t>>> map_added_lines(const std::vector<MethodUnit>& methods,
                                                                             const std::vector<AddedLine>& lines);

}  // namespace pcc
