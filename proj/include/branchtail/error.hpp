#pragma once

#include <stdexcept>
#include <string>

namespace branchtail {

// Failure categories shared by the whole library. The C API maps these to
// integer status codes, the CLI maps them to process exit codes.
enum class errc {
    none = 0,
    config,
    supercritical,
    io,
    unsupported_analytic,
    infinite_mean,
    index_out_of_range,
    dimension_mismatch,
    degenerate_subtree,
    no_convergence,
    empty_sample,
    insufficient_data,
    too_few_exceedances,
    invalid_argument,
};

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace branchtail
