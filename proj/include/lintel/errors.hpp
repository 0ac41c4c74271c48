#pragma once

#include <stdexcept>
#include <string>

namespace lintel {

/// Bad kernel hyperparameters or malformed model description.
struct invalid_spec_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Kernel family with no state-space representation in this engine.
struct unsupported_kernel_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Observation timestamp earlier than the stream position.
struct out_of_order_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear-algebra failure (non-PD matrix after jitter escalation, etc.).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable or ill-formed input data file.
struct ingestion_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; message names the offending field.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lintel
