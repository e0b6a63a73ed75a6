#pragma once

#include <stdexcept>
#include <string>

namespace bracket {

// Invalid parameter: a physical or configuration value outside its domain.
// The CLI maps this family to exit code 2.
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The inputs are valid individually but the requested quantity is undefined
// (0/0 Fano factor, zero-variance marginals, too few samples).
class degenerate_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Data-analysis failures in the fringe pipeline.
class analysis_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class flat_fringe_error : public analysis_error {
public:
    using analysis_error::analysis_error;
};

class branch_ambiguity_error : public analysis_error {
public:
    using analysis_error::analysis_error;
};

class empty_window_error : public analysis_error {
public:
    using analysis_error::analysis_error;
};

// Filesystem and parse failures (exit code 3).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw domain_error(what);
}

}  // namespace detail

}  // namespace bracket
