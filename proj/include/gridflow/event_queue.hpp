#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow {

/// Simulated time in seconds since the scenario epoch (UTC midnight of day 0).
using SimTime = double;

enum class EventKind : std::uint8_t {
    FlowCompleted,
    FileRecorded,
    ActivityTick,
    AnalysisStart,
    ReproductionStart,
    MetricSample,
};

const char* event_kind_name(EventKind kind) noexcept;

/// Payload is a triple of kind-specific identifiers (flow id, file id, center id, ...).
/// Handlers never rely on pointer identity, which keeps dispatch order reproducible.
struct Event {
    EventKind kind{};
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;
};

/// Opaque ticket for cancellation. seq 0 is never issued and acts as "invalid".
struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const noexcept { return seq != 0; }
};

/// Time-ordered event queue with a virtual clock.
///
/// Total dispatch order is (fire_at, insertion seq): simultaneous events fire in
/// the order they were scheduled, so identical schedules replay identically.
class EventQueue {
public:
    using Handler = std::function<void(const Event&)>;

    SimTime now() const noexcept { return now_; }
    std::size_t pending() const noexcept { return live_.size(); }
    bool pending_before(SimTime t) const;

    /// fire_at must not precede the current clock. Scheduling at now() is allowed;
    /// the event runs after everything already scheduled for that instant.
    EventHandle schedule(SimTime fire_at, Event ev, Handler handler);

    /// True if the event was still pending; false for already fired or cancelled.
    bool cancel(EventHandle handle);

    /// Dispatches every event with fire_at <= t_end in order; the clock tracks each
    /// dispatch and ends at exactly t_end. Returns the number dispatched.
    /// A throwing handler halts the run with a HandlerFault diagnostic.
    std::size_t run_until(SimTime t_end);

private:
    struct HeapItem {
        SimTime at;
        std::uint64_t seq;
    };
    struct FiresLater {
        bool operator()(const HeapItem& x, const HeapItem& y) const noexcept {
            if (x.at != y.at) return x.at > y.at;
            return x.seq > y.seq;
        }
    };
    struct Scheduled {
        Event ev;
        Handler handler;
    };

    std::priority_queue<HeapItem, std::vector<HeapItem>, FiresLater> heap_;
    std::unordered_map<std::uint64_t, Scheduled> live_;
    std::uint64_t next_seq_ = 1;
    SimTime now_ = 0.0;
};

} // namespace gridflow
