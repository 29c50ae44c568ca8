#pragma once

#include <stdexcept>
#include <string>

namespace gatecell {

// Operand shapes do not agree; the message names both shapes.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation's preconditions were violated (cache/params mismatch, bad counts).
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries a byte offset or line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss handed to the learning-rate schedule.
struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training hit a non-finite loss; carries the batch index and the lr in use.
struct DivergenceError : std::runtime_error {
    DivergenceError(std::size_t batch_index, double lr, const std::string& what)
        : std::runtime_error(what), batch_index(batch_index), lr(lr) {}
    std::size_t batch_index;
    double lr;
};

} // namespace gatecell
