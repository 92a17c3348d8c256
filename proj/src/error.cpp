#include "pcc/error.hpp"

namespace pcc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::repo_unreadable: return "RepoUnreadable";
        case ErrorCode::branch_missing: return "BranchMissing";
        case ErrorCode::empty_input: return "EmptyInput";
        case ErrorCode::too_few_instances: return "TooFewInstances";
        case ErrorCode::anchor_ineligible: return "AnchorIneligible";
        case ErrorCode::target_too_large: return "TargetTooLarge";
        case ErrorCode::dataset_mismatch: return "DatasetMismatch";
        case ErrorCode::instance_set_mismatch: return "InstanceSetMismatch";
        case ErrorCode::empty_test_set: return "EmptyTestSet";
        case ErrorCode::empty_train_set: return "EmptyTrainSet";
        case ErrorCode::non_positive_delta: return "NonPositiveDelta";
        case ErrorCode::missing_stage: return "MissingStage";
        case ErrorCode::config_hash_mismatch: return "ConfigHashMismatch";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::data_error: return "DataError";
    }
    return "Unknown";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::config_error:
        case ErrorCode::config_hash_mismatch:
        case ErrorCode::non_positive_delta:
            return 2;
        default:
            return 3;
    }
}

}  // namespace pcc
