#pragma once

#include <stdexcept>
#include <string>

namespace bohmion {

enum class ErrorKind {
    invalid_extent,
    invalid_count,
    out_of_bounds,
    grid_mismatch,
    node_singularity,
    non_convergence,
    empty_seed_set,
    parse,
    validation,
    io,
};

/// Exception carrying a machine-checkable kind next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Process exit code for an error kind: 2 for bad input, 3 for numerical failure, 1 for I/O.
int exit_code_for(ErrorKind kind) noexcept;

} // namespace bohmion
