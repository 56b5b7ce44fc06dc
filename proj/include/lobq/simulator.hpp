#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lobq/discrete_dist.hpp"
#include "lobq/estimation.hpp"
#include "lobq/flow_params.hpp"

namespace lobq {

enum class Weighting { time, event };

/// How the second limit (the resurrection source after aggressive market
/// orders) is produced:
///   coupled_queue      - a live queue driven by lambda2/theta2/g2
///   resample_from_dist - independent draws from a fixed law (pi2_override
///                        or the estimated empirical law)
enum class SecondLimitMode { coupled_queue, resample_from_dist };

/// What happens to the coupled queue after it is promoted to best quote:
/// redraw from its own stationary law (matches the analytic models) or
/// restart from a single share.
enum class SecondLimitReset { stationary_redraw, one_share };

struct SimConfig {
    FlowParams params;
    std::optional<double> horizon_seconds;
    std::optional<std::uint64_t> max_events;  // counts logged flow events
    std::uint64_t seed = 0;
    Weighting weighting = Weighting::time;
    SecondLimitMode second_limit_mode = SecondLimitMode::coupled_queue;
    SecondLimitReset reset_policy = SecondLimitReset::stationary_redraw;
};

/// Piecewise-constant sample path of the best-quote volume. A segment is the
/// sojourn between consecutive path events (order-flow events plus best-quote
/// cancellations); second-limit-only activity does not break segments.
struct PathRecord {
    struct Segment {
        double duration;
        std::int32_t volume;
        bool operator==(const Segment&) const = default;
    };
    std::vector<Segment> segments;

    struct EventCounts {
        std::uint64_t limit_spread = 0;
        std::uint64_t limit_best = 0;
        std::uint64_t limit_book = 0;
        std::uint64_t market_partial = 0;
        std::uint64_t market_aggressive = 0;
        std::uint64_t cancel_best = 0;    // not part of the order-flow log
        std::uint64_t cancel_second = 0;  // ditto
        std::uint64_t logged() const {
            return limit_spread + limit_best + limit_book + market_partial +
                   market_aggressive;
        }
        bool operator==(const EventCounts&) const = default;
    };
    EventCounts counts;

    double total_time = 0.0;  // compensated sum of segment durations

    bool operator==(const PathRecord&) const = default;
};

/// Receiver for the simulated order flow (cancellations are not flow events
/// and never reach the sink).
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void on_event(const FlowEvent& event) = 0;
};

/// Streams simulated flow events in the estimation CSV schema.
class EventLogWriter : public EventSink {
public:
    explicit EventLogWriter(std::ostream& out);
    void on_event(const FlowEvent& event) override;

private:
    std::ostream& out_;
};

/// Collects simulated flow events in memory.
class EventCollector : public EventSink {
public:
    void on_event(const FlowEvent& event) override { events.push_back(event); }
    std::vector<FlowEvent> events;
};

/// The generator backing `simulate`; recorded in output metadata.
const char* simulator_rng_name();

/// Event-driven simulation of the best-quote mechanism under competing
/// exponential clocks. Deterministic given the seed. When `sink` is given,
/// every flow event is delivered to it.
PathRecord simulate(const SimConfig& config, EventSink* sink = nullptr);

/// Volume histogram of a path: time weighting divides sojourn durations by
/// total time; event weighting counts each segment once.
DiscreteDist histogram(const PathRecord& path, Weighting weighting);

}  // namespace lobq
