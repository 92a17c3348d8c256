#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcc {

enum class ErrorCode {
    repo_unreadable,
    branch_missing,
    empty_input,
    too_few_instances,
    anchor_ineligible,
    target_too_large,
    dataset_mismatch,
    instance_set_mismatch,
    empty_test_set,
    empty_train_set,
    non_positive_delta,
    missing_stage,
    config_hash_mismatch,
    config_error,
    data_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Process exit code for the CLI: 2 for configuration problems, 3 for data problems.
int exit_code_for(ErrorCode code);

}  // namespace pcc
