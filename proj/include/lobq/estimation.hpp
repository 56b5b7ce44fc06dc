#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lobq/discrete_dist.hpp"
#include "lobq/flow_params.hpp"

namespace lobq {

/// The five classified order flows.
enum class EventKind {
    limit_spread,      // aggressive limit order inside the spread
    limit_best,        // limit order at the best quote
    limit_book,        // limit order at the second limit
    market_partial,    // unit-sized market order
    market_aggressive  // market order consuming the whole best quote
};
inline constexpr std::size_t kNumEventKinds = 5;

const char* event_kind_name(EventKind kind);
EventKind parse_event_kind(const std::string& text);

struct FlowEvent {
    double timestamp = 0.0;  // seconds, nondecreasing within a session
    EventKind kind = EventKind::limit_best;
    std::int64_t size = 1;   // shares, >= 1
    std::optional<std::int64_t> best_volume;    // post-event, optional
    std::optional<std::int64_t> second_volume;  // post-event, optional
};

struct SessionStats {
    double duration = 0.0;  // observed seconds
    std::array<std::uint64_t, kNumEventKinds> counts{};
    std::array<double, kNumEventKinds> mean_sizes{};  // sigma_0..sigma_muA (rescaled)
    double L1 = 0.0;  // time-weighted average best-quote volume (rescaled)
    double L2 = 0.0;  // same for the second limit
    bool has_L1 = false;
    bool has_L2 = false;
    bool type0_only = false;  // no aggressive events in the log
    double rescale_factor = 1.0;
    bool theta_calibrated = false;
};

/// CSV ingestion. Schema (header required):
///   timestamp,kind,size,best_volume,second_volume
/// with the last two columns optional (empty allowed). Throws ParseError with
/// the offending line number on malformed rows or timestamp regressions.
std::vector<FlowEvent> ingest(std::istream& in);
std::vector<FlowEvent> ingest_file(const std::string& path);

void write_event_log_header(std::ostream& out);
void write_event_log_row(std::ostream& out, const FlowEvent& event);

/// Daily observation window, in seconds of day.
struct SessionWindow {
    double start_sec;
    double end_sec;
};
SessionWindow parse_session_window(const std::string& text);  // "HH:MM-HH:MM"

/// Splits a (possibly multi-day) log into per-day sessions restricted to the
/// window; days without events produce no session.
std::vector<std::vector<FlowEvent>> split_sessions(
    const std::vector<FlowEvent>& events, const SessionWindow& window);

/// Divides every size and volume by the average partial-market-order size,
/// rounding half-up with floor 1. Logs without trades pass through unchanged.
std::vector<FlowEvent> rescale_by_trade_size(const std::vector<FlowEvent>& events,
                                             double* factor_out = nullptr);

/// Closed-form MLE for the geometric law on {1, 2, ...}: q = 1 / sample mean.
double fit_geometric_mle(const std::vector<std::int64_t>& samples);

struct EstimateResult {
    FlowParams params;
    SessionStats stats;
    // Time-weighted empirical law of the best-quote volume (rescaled), when
    // the log carries the post-event volume column.
    std::optional<DiscreteDist> best_volume_dist;
};

/// Rate, size and cancellation-rate estimation from one session spanning
/// `duration` seconds (events assumed to start at the session open).
EstimateResult estimate(const std::vector<FlowEvent>& events, double duration);

/// Multi-session variant: counts and sizes pool across sessions; the
/// time-weighted volume averages weight each session by its duration.
EstimateResult estimate_sessions(const std::vector<std::vector<FlowEvent>>& sessions,
                                 double session_duration);

}  // namespace lobq
