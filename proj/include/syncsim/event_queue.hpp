#pragma once

#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "syncsim/errors.hpp"

namespace syncsim {

enum class EventKind {
    MessageArrival,
    TaskComplete,
    QuorumTimerFire,
    SlotBoundary,
    MobilitySample,
    FailureCheck,
    JoinCheck,
};

template <class Payload>
struct SimEvent {
    double timestamp = 0.0;
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::MessageArrival;
    Payload payload{};
};

/// Virtual clock plus a priority queue ordered by (timestamp, sequence).
/// Sequence numbers are handed out in posting order, so events that share a
/// timestamp are dispatched first-posted first.
template <class Payload>
class EventQueue {
public:
    using Event = SimEvent<Payload>;

    double now() const noexcept { return now_; }
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    std::uint64_t dispatched() const noexcept { return dispatched_; }

    /// Returns the sequence number assigned to the event.
    std::uint64_t post(double timestamp, EventKind kind, Payload payload) {
        if (timestamp < now_)
            throw TimeTravel("event at t=" + std::to_string(timestamp) + " posted at now=" + std::to_string(now_));
        const std::uint64_t seq = next_seq_++;
        heap_.push(Event{timestamp, seq, kind, std::move(payload)});
        return seq;
    }

    const Event& peek() const { return heap_.top(); }

    /// Removes the earliest event and advances the clock to it.
    Event pop() {
        Event ev = heap_.top();
        heap_.pop();
        now_ = ev.timestamp;
        ++dispatched_;
        return ev;
    }

    void clear() { heap_ = decltype(heap_){}; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const noexcept {
            if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
};

}  // namespace syncsim
