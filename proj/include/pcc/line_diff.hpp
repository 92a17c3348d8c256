#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

/// A line that a minimal line diff classifies as inserted into the child text.
struct AddedLine {
    std::string file;
    std::size_t line_number = 1;  // 1-based, child coordinates
    std::string text;

    friend bool operator==(const AddedLine&, const AddedLine&) = default;
};

/// Splits on '\n'. A trailing newline does not open an extra empty line, and
/// the empty string has zero lines.
std::vector<std::string_view> split_lines(std::string_view text);

/// Inserted-side lines of a minimal (Myers, linear-space) line diff from
/// `parent_text` to `child_text`. Modified lines show up as delete + insert,
/// so only their new form is reported.
std::vector<AddedLine> added_lines(std::string_view parent_text, std::string_view child_text,
                                   std::string_view file = {});

}  // namespace pcc
