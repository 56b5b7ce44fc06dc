#include "lobq/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lobq/errors.hpp"

namespace lobq {

namespace {

constexpr const char* kKindNames[kNumEventKinds] = {
    "LIMIT_SPREAD", "LIMIT_BEST", "LIMIT_BOOK", "MARKET_PARTIAL",
    "MARKET_AGGRESSIVE"};

constexpr const char* kCsvHeader = "timestamp,kind,size,best_volume,second_volume";

std::size_t kind_index(EventKind kind) { return static_cast<std::size_t>(kind); }

}  // namespace

const char* event_kind_name(EventKind kind) { return kKindNames[kind_index(kind)]; }

EventKind parse_event_kind(const std::string& text) {
    for (std::size_t i = 0; i < kNumEventKinds; ++i)
        if (text == kKindNames[i]) return static_cast<EventKind>(i);
    throw ParameterError("unknown event kind '" + text + "'");
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& text, std::size_t line,
                          const char* what) {
    if (text.empty()) throw ParseError(line, std::string("empty ") + what);
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(v))
        throw ParseError(line, std::string("bad ") + what + " '" + text + "'");
    return v;
}

std::int64_t parse_int_field(const std::string& text, std::size_t line,
                             const char* what) {
    if (text.empty()) throw ParseError(line, std::string("empty ") + what);
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size())
        throw ParseError(line, std::string("bad ") + what + " '" + text + "'");
    return static_cast<std::int64_t>(v);
}

}  // namespace

std::vector<FlowEvent> ingest(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw IoError("empty event log");
    ++lineno;
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != kCsvHeader)
            throw ParseError(lineno, "expected header '" + std::string(kCsvHeader) +
                                         "', got '" + header + "'");
    }

    std::vector<FlowEvent> events;
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_row(line);
        if (f.size() < 3 || f.size() > 5)
            throw ParseError(lineno, "expected 3 to 5 fields, got " +
                                         std::to_string(f.size()));
        FlowEvent ev;
        ev.timestamp = parse_double_field(f[0], lineno, "timestamp");
        ev.kind = [&] {
            try {
                return parse_event_kind(f[1]);
            } catch (const ParameterError& e) {
                throw ParseError(lineno, e.what());
            }
        }();
        ev.size = parse_int_field(f[2], lineno, "size");
        if (ev.size < 1) throw ParseError(lineno, "size must be >= 1");
        if (f.size() > 3 && !f[3].empty()) {
            ev.best_volume = parse_int_field(f[3], lineno, "best_volume");
            if (*ev.best_volume < 0) throw ParseError(lineno, "negative best_volume");
        }
        if (f.size() > 4 && !f[4].empty()) {
            ev.second_volume = parse_int_field(f[4], lineno, "second_volume");
            if (*ev.second_volume < 0)
                throw ParseError(lineno, "negative second_volume");
        }
        if (ev.timestamp < last_t)
            throw ParseError(lineno, "timestamp regression: " +
                                         std::to_string(ev.timestamp) + " after " +
                                         std::to_string(last_t));
        last_t = ev.timestamp;
        events.push_back(ev);
    }
    return events;
}

std::vector<FlowEvent> ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return ingest(in);
}

void write_event_log_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_event_log_row(std::ostream& out, const FlowEvent& event) {
    char buf[128];
    int n = std::snprintf(buf, sizeof(buf), "%.9f,%s,%lld,", event.timestamp,
                          event_kind_name(event.kind),
                          static_cast<long long>(event.size));
    out.write(buf, n);
    if (event.best_volume)
        out << static_cast<long long>(*event.best_volume);
    out << ',';
    if (event.second_volume)
        out << static_cast<long long>(*event.second_volume);
    out << '\n';
}

SessionWindow parse_session_window(const std::string& text) {
    int h1, m1, h2, m2;
    if (std::sscanf(text.c_str(), "%d:%d-%d:%d", &h1, &m1, &h2, &m2) != 4)
        throw ParameterError("bad window '" + text + "', expected HH:MM-HH:MM");
    if (h1 < 0 || h1 > 23 || h2 < 0 || h2 > 24 || m1 < 0 || m1 > 59 || m2 < 0 ||
        m2 > 59)
        throw ParameterError("window fields out of range in '" + text + "'");
    SessionWindow w{h1 * 3600.0 + m1 * 60.0, h2 * 3600.0 + m2 * 60.0};
    if (!(w.end_sec > w.start_sec))
        throw ParameterError("window must have positive length");
    return w;
}

std::vector<std::vector<FlowEvent>> split_sessions(
    const std::vector<FlowEvent>& events, const SessionWindow& window) {
    std::vector<std::vector<FlowEvent>> sessions;
    long long current_day = -1;
    for (const FlowEvent& ev : events) {
        double day_sec = std::fmod(ev.timestamp, 86400.0);
        if (day_sec < window.start_sec || day_sec >= window.end_sec) continue;
        long long day = static_cast<long long>(std::floor(ev.timestamp / 86400.0));
        if (day != current_day) {
            sessions.emplace_back();
            current_day = day;
        }
        FlowEvent shifted = ev;
        shifted.timestamp = day_sec - window.start_sec;  // session-relative
        sessions.back().push_back(shifted);
    }
    return sessions;
}

namespace {

double mean_trade_size(const std::vector<FlowEvent>& events) {
    double trade_sum = 0.0;
    std::uint64_t trade_count = 0;
    for (const FlowEvent& ev : events) {
        if (ev.kind == EventKind::market_partial) {
            trade_sum += static_cast<double>(ev.size);
            ++trade_count;
        }
    }
    return trade_count > 0 ? trade_sum / static_cast<double>(trade_count) : 1.0;
}

std::vector<FlowEvent> rescale_with_factor(const std::vector<FlowEvent>& events,
                                           double factor) {
    if (factor == 1.0) return events;
    auto rescale = [factor](std::int64_t v) {
        double scaled = static_cast<double>(v) / factor;
        auto rounded = static_cast<std::int64_t>(std::floor(scaled + 0.5));
        return std::max<std::int64_t>(rounded, 1);
    };
    std::vector<FlowEvent> out;
    out.reserve(events.size());
    for (FlowEvent ev : events) {
        ev.size = rescale(ev.size);
        if (ev.best_volume) ev.best_volume = rescale(*ev.best_volume);
        if (ev.second_volume) ev.second_volume = rescale(*ev.second_volume);
        out.push_back(ev);
    }
    return out;
}

}  // namespace

std::vector<FlowEvent> rescale_by_trade_size(const std::vector<FlowEvent>& events,
                                             double* factor_out) {
    double factor = mean_trade_size(events);
    if (factor_out) *factor_out = factor;
    return rescale_with_factor(events, factor);
}

double fit_geometric_mle(const std::vector<std::int64_t>& samples) {
    if (samples.empty()) throw ParameterError("no samples for geometric fit");
    double sum = 0.0;
    for (std::int64_t s : samples) {
        if (s < 1) throw ParameterError("geometric samples must be >= 1");
        sum += static_cast<double>(s);
    }
    return static_cast<double>(samples.size()) / sum;
}

namespace {

struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// Time-weighted accumulator over post-event volume columns: each reported
// volume holds from its event until the next report, the last one until the
// session end.
struct VolumeIntegral {
    KahanSum weighted_sum;
    KahanSum covered_time;
    std::vector<double> mass;  // per volume, for the empirical law

    void add_session(const std::vector<std::pair<double, std::int64_t>>& points,
                     double session_end) {
        for (std::size_t k = 0; k < points.size(); ++k) {
            double t_end = k + 1 < points.size() ? points[k + 1].first : session_end;
            double span = t_end - points[k].first;
            if (span <= 0.0) continue;
            std::int64_t v = points[k].second;
            weighted_sum.add(span * static_cast<double>(v));
            covered_time.add(span);
            if (v >= 1) {
                if (static_cast<std::size_t>(v) > mass.size())
                    mass.resize(static_cast<std::size_t>(v), 0.0);
                mass[static_cast<std::size_t>(v - 1)] += span;
            }
        }
    }

    bool has_data() const { return covered_time.sum > 0.0; }
    double average() const { return weighted_sum.sum / covered_time.sum; }

    DiscreteDist distribution() const {
        std::vector<double> probs(mass);
        for (double& m : probs) m /= covered_time.sum;
        double sum = 0.0;
        for (double m : probs) sum += m;
        double tail = std::max(1.0 - sum, 0.0);
        return DiscreteDist(1, std::move(probs), tail);
    }
};

DiscreteDist empirical_size_dist(const std::vector<std::int64_t>& sizes) {
    std::int64_t max_size = 1;
    for (std::int64_t s : sizes) max_size = std::max(max_size, s);
    std::vector<double> probs(static_cast<std::size_t>(max_size), 0.0);
    for (std::int64_t s : sizes) probs[static_cast<std::size_t>(s - 1)] += 1.0;
    for (double& p : probs) p /= static_cast<double>(sizes.size());
    return DiscreteDist(1, std::move(probs), 0.0);
}

}  // namespace

EstimateResult estimate_sessions(const std::vector<std::vector<FlowEvent>>& sessions,
                                 double session_duration) {
    if (!(session_duration > 0.0))
        throw ParameterError("session duration must be positive");
    std::size_t total_events = 0;
    for (const auto& s : sessions) total_events += s.size();
    if (total_events == 0) throw ParameterError("no events to estimate from");

    EstimateResult result;
    SessionStats& stats = result.stats;
    stats.duration = session_duration * static_cast<double>(sessions.size());

    std::array<std::vector<std::int64_t>, kNumEventKinds> sizes;
    VolumeIntegral best_integral, second_integral;

    // One rescale factor for the whole sample, pooled over sessions.
    {
        double trade_sum = 0.0;
        std::uint64_t trade_count = 0;
        for (const auto& session : sessions)
            for (const FlowEvent& ev : session)
                if (ev.kind == EventKind::market_partial) {
                    trade_sum += static_cast<double>(ev.size);
                    ++trade_count;
                }
        stats.rescale_factor =
            trade_count > 0 ? trade_sum / static_cast<double>(trade_count) : 1.0;
    }

    for (const auto& session : sessions) {
        std::vector<FlowEvent> rescaled =
            rescale_with_factor(session, stats.rescale_factor);
        std::vector<std::pair<double, std::int64_t>> best_points, second_points;
        for (const FlowEvent& ev : rescaled) {
            std::size_t k = kind_index(ev.kind);
            ++stats.counts[k];
            sizes[k].push_back(ev.size);
            if (ev.best_volume) best_points.emplace_back(ev.timestamp, *ev.best_volume);
            if (ev.second_volume)
                second_points.emplace_back(ev.timestamp, *ev.second_volume);
        }
        double session_start =
            session.empty() ? 0.0 : session.front().timestamp;
        double session_end = session_start + session_duration;
        best_integral.add_session(best_points, session_end);
        second_integral.add_session(second_points, session_end);
    }

    FlowParams& p = result.params;
    p.lambda0 = static_cast<double>(stats.counts[0]) / stats.duration;
    p.lambda1 = static_cast<double>(stats.counts[1]) / stats.duration;
    p.lambda2 = static_cast<double>(stats.counts[2]) / stats.duration;
    p.mu = static_cast<double>(stats.counts[3]) / stats.duration;
    p.muA = static_cast<double>(stats.counts[4]) / stats.duration;

    for (std::size_t k = 0; k < kNumEventKinds; ++k) {
        if (sizes[k].empty()) continue;
        double sum = 0.0;
        for (std::int64_t s : sizes[k]) sum += static_cast<double>(s);
        stats.mean_sizes[k] = sum / static_cast<double>(sizes[k].size());
    }

    stats.type0_only = stats.counts[0] + stats.counts[4] == 0;

    if (!sizes[0].empty()) {
        p.g0_spec = DistFamily::empirical(empirical_size_dist(sizes[0]));
        p.fits.q0 = fit_geometric_mle(sizes[0]);
    }
    if (!sizes[1].empty()) {
        p.g1_spec = DistFamily::empirical(empirical_size_dist(sizes[1]));
        p.fits.q1 = fit_geometric_mle(sizes[1]);
    }
    if (!sizes[2].empty()) {
        p.g2_spec = DistFamily::empirical(empirical_size_dist(sizes[2]));
        p.fits.q2 = fit_geometric_mle(sizes[2]);
    }

    if (best_integral.has_data()) {
        stats.L1 = best_integral.average();
        stats.has_L1 = true;
        result.best_volume_dist = best_integral.distribution();
    }
    if (second_integral.has_data()) {
        stats.L2 = second_integral.average();
        stats.has_L2 = true;
        result.params.pi2_empirical = second_integral.distribution();
    }

    // Flow-balance calibration runs only when both average volumes were
    // observable; without them the thetas stay at zero and theta_calibrated
    // is false. A nonpositive inflow surplus inside calibrate_thetas throws.
    if (stats.has_L1 && stats.has_L2 && p.lambda2 > 0.0) {
        CalibratedThetas thetas = calibrate_thetas(
            p.lambda1, stats.mean_sizes[1], p.mu, stats.mean_sizes[3], p.muA,
            stats.mean_sizes[4], p.lambda2, stats.mean_sizes[2], stats.L1,
            stats.L2);
        p.theta1 = thetas.theta1;
        p.theta2 = thetas.theta2;
        stats.theta_calibrated = true;
    }
    return result;
}

EstimateResult estimate(const std::vector<FlowEvent>& events, double duration) {
    return estimate_sessions({events}, duration);
}

}  // namespace lobq
