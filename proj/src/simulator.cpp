#include "lobq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "lobq/errors.hpp"
#include "lobq/stationary.hpp"

namespace lobq {

namespace {

// All randomness flows through explicit 53-bit uniforms so that paths are
// reproducible across standard libraries, not just across runs.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {  // (0, 1]
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

private:
    std::mt19937_64 engine_;
};

class DiscreteSampler {
public:
    DiscreteSampler() = default;
    explicit DiscreteSampler(const DiscreteDist& d) : offset_(d.support_offset) {
        cdf_.reserve(d.probs.size());
        double c = 0.0;
        for (double w : d.probs) {
            c += w;
            cdf_.push_back(c);
        }
        total_ = c;
        if (!(total_ > 0.0))
            throw ParameterError("cannot sample from a distribution with zero mass");
    }

    std::int64_t draw(SimRng& rng) const {
        double u = rng.uniform01() * total_;
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
        if (idx >= cdf_.size()) idx = cdf_.size() - 1;
        return offset_ + static_cast<std::int64_t>(idx);
    }

private:
    int offset_ = 0;
    std::vector<double> cdf_;
    double total_ = 0.0;
};

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

}  // namespace

EventLogWriter::EventLogWriter(std::ostream& out) : out_(out) {
    write_event_log_header(out_);
}

void EventLogWriter::on_event(const FlowEvent& event) {
    write_event_log_row(out_, event);
}

const char* simulator_rng_name() { return "mt19937_64"; }

PathRecord simulate(const SimConfig& config, EventSink* sink) {
    const FlowParams& p = config.params;
    p.validate_rates();
    if (!config.horizon_seconds && !config.max_events)
        throw ParameterError("simulation needs a time horizon or an event budget");
    if (config.horizon_seconds && !(*config.horizon_seconds >= 0.0))
        throw ParameterError("horizon must be >= 0");

    PathRecord path;
    if ((config.horizon_seconds && *config.horizon_seconds == 0.0) ||
        (config.max_events && *config.max_events == 0))
        return path;

    bool coupled = config.second_limit_mode == SecondLimitMode::coupled_queue &&
                   p.lambda2 > 0.0;
    if (coupled && !(p.theta2 > 0.0))
        throw ParameterError("coupled second-limit queue needs theta2 > 0");
    if (coupled && !p.g2_spec)
        throw ParameterError("coupled second-limit queue needs a g2 size law");

    DiscreteSampler g0_sampler, g1_sampler, g2_sampler, pi2_sampler, y2_sampler;
    if (p.lambda0 > 0.0) g0_sampler = DiscreteSampler(make_family_adaptive(p.g0_spec));
    if (p.lambda1 > 0.0) g1_sampler = DiscreteSampler(make_family_adaptive(p.g1_spec));
    if (coupled) {
        DiscreteDist g2 = make_family_adaptive(*p.g2_spec);
        g2_sampler = DiscreteSampler(g2);
        // Stationary law of the uninterrupted second-limit queue, used for the
        // initial state and (by default) after each promotion.
        DiscreteDist y2_law =
            solve_type0(p.lambda2, 0.0, p.theta2, *p.g2_spec).pi.shifted(1);
        y2_sampler = DiscreteSampler(y2_law);
    }
    if (p.muA > 0.0 && !coupled) {
        const DiscreteDist* pi2 = nullptr;
        if (p.pi2_override)
            pi2 = &*p.pi2_override;
        else if (p.pi2_empirical)
            pi2 = &*p.pi2_empirical;
        if (!pi2)
            throw ParameterError(
                "aggressive market orders need a second-limit source: provide "
                "lambda2/theta2/g2 (coupled mode) or a pi2 law (resample mode)");
        pi2_sampler = DiscreteSampler(*pi2);
    }

    SimRng rng(config.seed);
    double beta = p.killing_rate();

    std::int64_t best = 1;
    std::int64_t second = 0;
    if (coupled) second = y2_sampler.draw(rng);

    double t = 0.0;
    std::uint64_t logged = 0;
    KahanSum total_time;
    double sojourn = 0.0;

    auto emit = [&](EventKind kind, std::int64_t size) {
        ++logged;
        if (!sink) return;
        FlowEvent ev;
        ev.timestamp = t;
        ev.kind = kind;
        ev.size = size;
        ev.best_volume = best;
        if (coupled) ev.second_volume = second;
        sink->on_event(ev);
    };
    auto close_segment = [&](std::int64_t held_volume) {
        path.segments.push_back(
            {sojourn, static_cast<std::int32_t>(held_volume)});
        total_time.add(sojourn);
        sojourn = 0.0;
    };

    // Initial state: when killing is active the path opens with its own
    // resurrection event, so the log covers the whole horizon.
    auto draw_promoted = [&]() -> std::int64_t {
        if (coupled) {
            std::int64_t v = second;
            second = config.reset_policy == SecondLimitReset::stationary_redraw
                         ? y2_sampler.draw(rng)
                         : 1;
            return v;
        }
        return pi2_sampler.draw(rng);
    };
    if (beta > 0.0) {
        if (p.lambda0 > 0.0) {
            best = g0_sampler.draw(rng);
            ++path.counts.limit_spread;
            emit(EventKind::limit_spread, best);
        } else {
            best = draw_promoted();
            ++path.counts.market_aggressive;
            emit(EventKind::market_aggressive, best);
        }
    }

    bool budget_hit = config.max_events && logged >= *config.max_events;
    while (!budget_hit) {
        double r_best_limit = p.lambda1;
        double r_cancel = static_cast<double>(best - 1) * p.theta1;
        double r_partial = p.mu;
        double r_spread = p.lambda0;
        double r_aggr = p.muA;
        double r_book = coupled ? p.lambda2 : 0.0;
        double r_cancel2 =
            coupled ? static_cast<double>(second - 1) * p.theta2 : 0.0;
        double total_rate =
            r_best_limit + r_cancel + r_partial + r_spread + r_aggr + r_book + r_cancel2;
        if (!(total_rate > 0.0)) {
            if (config.horizon_seconds) {
                sojourn += *config.horizon_seconds - t;
                t = *config.horizon_seconds;
            }
            break;
        }

        double wait = rng.exponential(total_rate);
        if (config.horizon_seconds && t + wait > *config.horizon_seconds) {
            sojourn += *config.horizon_seconds - t;
            t = *config.horizon_seconds;
            break;
        }
        t += wait;
        sojourn += wait;

        double u = rng.uniform01() * total_rate;
        double acc = 0.0;
        auto hit = [&](double rate) {
            acc += rate;
            return u <= acc;
        };

        if (hit(r_best_limit)) {
            std::int64_t s = g1_sampler.draw(rng);
            close_segment(best);
            best += s;
            ++path.counts.limit_best;
            emit(EventKind::limit_best, s);
        } else if (hit(r_cancel)) {
            close_segment(best);
            best -= 1;
            ++path.counts.cancel_best;
        } else if (hit(r_partial)) {
            close_segment(best);
            if (best >= 2) best -= 1;  // the last share cannot be matched
            ++path.counts.market_partial;
            emit(EventKind::market_partial, 1);
        } else if (hit(r_spread)) {
            std::int64_t s = g0_sampler.draw(rng);
            close_segment(best);
            best = s;
            ++path.counts.limit_spread;
            emit(EventKind::limit_spread, s);
        } else if (hit(r_aggr)) {
            std::int64_t consumed = best;
            close_segment(best);
            best = draw_promoted();
            ++path.counts.market_aggressive;
            emit(EventKind::market_aggressive, consumed);
        } else if (hit(r_book)) {
            std::int64_t s = g2_sampler.draw(rng);
            close_segment(best);
            second += s;
            ++path.counts.limit_book;
            emit(EventKind::limit_book, s);
        } else {
            second -= 1;  // second-limit cancellation; the best quote holds
            ++path.counts.cancel_second;
        }
        budget_hit = config.max_events && logged >= *config.max_events;
    }

    // Trailing sojourn: up to the horizon, or zero-length at an event budget
    // stop so the final post-event volume still carries event weight.
    close_segment(best);
    path.total_time = total_time.sum;
    return path;
}

DiscreteDist histogram(const PathRecord& path, Weighting weighting) {
    if (path.segments.empty())
        throw ParameterError("empty path: no distribution to build");

    std::int32_t max_volume = 1;
    for (const auto& seg : path.segments)
        max_volume = std::max(max_volume, seg.volume);

    std::vector<double> mass(static_cast<std::size_t>(max_volume), 0.0);
    if (weighting == Weighting::time) {
        if (!(path.total_time > 0.0))
            throw ParameterError("zero-duration path has no time-weighted law");
        for (const auto& seg : path.segments)
            mass[static_cast<std::size_t>(seg.volume - 1)] +=
                seg.duration / path.total_time;
    } else {
        double w = 1.0 / static_cast<double>(path.segments.size());
        for (const auto& seg : path.segments)
            mass[static_cast<std::size_t>(seg.volume - 1)] += w;
    }
    double sum = 0.0;
    for (double m : mass) sum += m;
    double tail = 1.0 - sum;
    if (std::fabs(tail) < 1e-9) tail = std::max(tail, 0.0);
    return DiscreteDist(1, std::move(mass), tail);
}

}  // namespace lobq
