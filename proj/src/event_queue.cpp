#include "gridflow/event_queue.hpp"

#include <cstdio>

namespace gridflow {

const char* event_kind_name(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::FlowCompleted: return "FlowCompleted";
    case EventKind::FileRecorded: return "FileRecorded";
    case EventKind::ActivityTick: return "ActivityTick";
    case EventKind::AnalysisStart: return "AnalysisStart";
    case EventKind::ReproductionStart: return "ReproductionStart";
    case EventKind::MetricSample: return "MetricSample";
    }
    return "UnknownEvent";
}

bool EventQueue::pending_before(SimTime t) const {
    // The heap may hold tombstones of cancelled events; check against live ones.
    if (live_.empty()) return false;
    auto heap = heap_; // cheap at the scales involved; used by tests only
    while (!heap.empty()) {
        const HeapItem item = heap.top();
        heap.pop();
        if (live_.count(item.seq) != 0) return item.at <= t;
    }
    return false;
}

EventHandle EventQueue::schedule(SimTime fire_at, Event ev, Handler handler) {
    if (fire_at < now_) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s scheduled at %.9g but clock is %.9g",
                      event_kind_name(ev.kind), fire_at, now_);
        raise(Errc::scheduling_in_past, buf);
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(HeapItem{fire_at, seq});
    live_.emplace(seq, Scheduled{ev, std::move(handler)});
    return EventHandle{seq};
}

bool EventQueue::cancel(EventHandle handle) {
    if (!handle.valid()) return false;
    return live_.erase(handle.seq) != 0;
}

std::size_t EventQueue::run_until(SimTime t_end) {
    if (t_end < now_) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "run_until(%.9g) precedes clock %.9g", t_end, now_);
        raise(Errc::scheduling_in_past, buf);
    }
    std::size_t dispatched = 0;
    while (!heap_.empty() && heap_.top().at <= t_end) {
        const HeapItem item = heap_.top();
        heap_.pop();
        auto it = live_.find(item.seq);
        if (it == live_.end()) continue; // cancelled
        // Detach before invoking: a handler cancelling itself sees "already fired".
        Scheduled scheduled = std::move(it->second);
        live_.erase(it);
        now_ = item.at;
        try {
            scheduled.handler(scheduled.ev);
        } catch (const std::exception& ex) {
            char buf[240];
            std::snprintf(buf, sizeof buf, "%s handler at t=%.9g threw: %s",
                          event_kind_name(scheduled.ev.kind), now_, ex.what());
            raise(Errc::handler_fault, buf);
        }
        ++dispatched;
    }
    now_ = t_end;
    return dispatched;
}

} // namespace gridflow
