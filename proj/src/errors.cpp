#include "gridflow/errors.hpp"

namespace gridflow {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::scheduling_in_past: return "SchedulingInPast";
    case Errc::handler_fault: return "HandlerFault";
    case Errc::cyclic_topology: return "CyclicTopology";
    case Errc::disconnected_topology: return "DisconnectedTopology";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::zero_size_transfer: return "ZeroSizeTransfer";
    case Errc::stalled_network: return "StalledNetwork";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::range_violation: return "RangeViolation";
    case Errc::unreachable_destination: return "UnreachableDestination";
    case Errc::no_holder: return "NoHolder";
    case Errc::duplicate_record: return "DuplicateRecord";
    case Errc::io_failure: return "IoFailure";
    }
    return "UnknownError";
}

} // namespace gridflow
