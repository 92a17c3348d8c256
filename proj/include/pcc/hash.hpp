#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace pcc {

/// Lowercase hex SHA-256 digest of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of the file contents; throws Error(data_error) when unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Hash of several fields joined with an unambiguous separator.
std::string hash_fields(std::initializer_list<std::string_view> fields);

/// Derives a named sub-seed from the master seed. All randomness in the
/// pipeline flows through here so results never depend on visiting order.
std::uint64_t sub_seed(std::uint64_t master, std::string_view label);

}  // namespace pcc
