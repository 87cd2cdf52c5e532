#include "bohmion/error.hpp"

namespace bohmion {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::invalid_extent:
    case ErrorKind::invalid_count:
    case ErrorKind::grid_mismatch:
        return 2;
    case ErrorKind::node_singularity:
    case ErrorKind::non_convergence:
    case ErrorKind::out_of_bounds:
    case ErrorKind::empty_seed_set:
        return 3;
    case ErrorKind::io:
        return 1;
    }
    return 1;
}

} // namespace bohmion
