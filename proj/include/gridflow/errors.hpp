#pragma once

#include <stdexcept>
#include <string>

namespace gridflow {

/// Stable error identities for everything the library can reject.
enum class Errc {
    scheduling_in_past,
    handler_fault,
    cyclic_topology,
    disconnected_topology,
    unknown_node,
    zero_size_transfer,
    stalled_network,
    syntax_error,
    unknown_key,
    range_violation,
    unreachable_destination,
    no_holder,
    duplicate_record,
    io_failure,
};

const char* errc_name(Errc code) noexcept;

class SimError : public std::runtime_error {
public:
    SimError(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw SimError(code, msg); }

} // namespace gridflow
