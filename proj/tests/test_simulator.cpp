#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lobq/errors.hpp"
#include "lobq/estimation.hpp"
#include "lobq/simulator.hpp"
#include "lobq/stationary.hpp"

using namespace lobq;

namespace {

FlowParams full_params() {
    FlowParams p;
    p.lambda0 = 1.0;
    p.muA = 1.0;
    p.lambda1 = 2.0;
    p.theta1 = 1.0;
    p.lambda2 = 1.0;
    p.theta2 = 1.0;
    p.g0_spec = DistFamily::unit();
    p.g1_spec = DistFamily::unit();
    p.g2_spec = DistFamily::unit();
    return p;
}

}  // namespace

TEST_CASE("zero horizon or zero budget yields an empty path") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.horizon_seconds = 0.0;
    PathRecord path = simulate(cfg);
    CHECK(path.segments.empty());
    CHECK(path.total_time == 0.0);
    CHECK_THROWS_AS(histogram(path, Weighting::time), ParameterError);

    cfg.horizon_seconds.reset();
    cfg.max_events = 0;
    CHECK(simulate(cfg).segments.empty());

    cfg.max_events.reset();
    CHECK_THROWS_AS(simulate(cfg), ParameterError);
}

TEST_CASE("identical seeds give identical paths") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.max_events = 100000;
    cfg.seed = 7;
    PathRecord a = simulate(cfg);
    PathRecord b = simulate(cfg);
    CHECK(a == b);
    cfg.seed = 8;
    CHECK_FALSE(simulate(cfg) == a);
}

TEST_CASE("hand-built paths pin the histogram semantics") {
    PathRecord path;
    path.segments = {{10.0, 3}};
    path.total_time = 10.0;
    DiscreteDist single = histogram(path, Weighting::time);
    CHECK(single.at(3) == 1.0);

    path.segments = {{1.0, 2}, {1.0, 5}};
    path.total_time = 2.0;
    DiscreteDist even = histogram(path, Weighting::time);
    CHECK(even.at(2) == doctest::Approx(0.5));
    CHECK(even.at(5) == doctest::Approx(0.5));

    path.segments = {{3.0, 2}, {1.0, 5}};
    path.total_time = 4.0;
    DiscreteDist timew = histogram(path, Weighting::time);
    CHECK(timew.at(2) == doctest::Approx(0.75));
    CHECK(timew.at(5) == doctest::Approx(0.25));
    DiscreteDist eventw = histogram(path, Weighting::event);
    CHECK(eventw.at(2) == doctest::Approx(0.5));
    CHECK(eventw.at(5) == doctest::Approx(0.5));
}

TEST_CASE("durations re-sum exactly to the recorded total") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.max_events = 50000;
    cfg.seed = 42;
    PathRecord path = simulate(cfg);
    double sum = 0.0, comp = 0.0;
    std::int32_t floor_volume = path.segments.front().volume;
    for (const auto& seg : path.segments) {
        double y = seg.duration - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        floor_volume = std::min(floor_volume, seg.volume);
    }
    CHECK(sum == path.total_time);
    CHECK(floor_volume >= 1);
}

TEST_CASE("no-kill benchmark run converges to the shifted Poisson law") {
    FlowParams p;
    p.lambda1 = 2.0;
    p.theta1 = 1.0;
    p.g1_spec = DistFamily::unit();
    SimConfig cfg;
    cfg.params = p;
    cfg.max_events = 1000000;
    cfg.seed = 3;
    DiscreteDist hist = histogram(simulate(cfg), Weighting::time);
    DiscreteDist target = make_family_adaptive(DistFamily::poisson(2.0)).shifted(1);
    CHECK(l2_distance(hist, target) < 5e-3);
}

TEST_CASE("aggressive event tallies concentrate at their rate") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.max_events = 200000;
    cfg.seed = 11;
    PathRecord path = simulate(cfg);
    double expected = cfg.params.killing_rate() * path.total_time;
    double got = static_cast<double>(path.counts.limit_spread +
                                     path.counts.market_aggressive);
    CHECK(std::fabs(got - expected) <= 4.0 * std::sqrt(expected));
}

TEST_CASE("aggressive orders need a second-limit source") {
    FlowParams p = full_params();
    p.lambda2 = 0.0;  // coupled queue unavailable
    SimConfig cfg;
    cfg.params = p;
    cfg.max_events = 10;
    CHECK_THROWS_AS(simulate(cfg), ParameterError);

    cfg.params.pi2_override = DiscreteDist(1, {0.5, 0.5});
    cfg.second_limit_mode = SecondLimitMode::resample_from_dist;
    CHECK_NOTHROW(simulate(cfg));
}

TEST_CASE("the emitted log round-trips through ingest") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.max_events = 100000;
    cfg.seed = 5;
    std::ostringstream log_text;
    EventLogWriter writer(log_text);
    PathRecord path = simulate(cfg, &writer);

    std::istringstream in(log_text.str());
    std::vector<FlowEvent> events = ingest(in);
    CHECK(events.size() == path.counts.logged());

    std::array<std::uint64_t, kNumEventKinds> counts{};
    for (const auto& ev : events) ++counts[static_cast<std::size_t>(ev.kind)];
    CHECK(counts[0] == path.counts.limit_spread);
    CHECK(counts[1] == path.counts.limit_best);
    CHECK(counts[2] == path.counts.limit_book);
    CHECK(counts[3] == path.counts.market_partial);
    CHECK(counts[4] == path.counts.market_aggressive);
}

TEST_CASE("partial market orders cannot take the last share but still count") {
    FlowParams p;
    p.mu = 5.0;
    p.theta1 = 1.0;  // never fires at volume 1
    p.g1_spec = DistFamily::unit();
    SimConfig cfg;
    cfg.params = p;
    cfg.max_events = 2000;
    cfg.seed = 4;
    PathRecord path = simulate(cfg);
    CHECK(path.counts.market_partial == 2000);
    for (const auto& seg : path.segments) CHECK(seg.volume == 1);
    CHECK(histogram(path, Weighting::time).at(1) == doctest::Approx(1.0));
}

TEST_CASE("second-limit reset policies both run") {
    SimConfig cfg;
    cfg.params = full_params();
    cfg.max_events = 5000;
    cfg.seed = 9;
    PathRecord redraw = simulate(cfg);
    cfg.reset_policy = SecondLimitReset::one_share;
    PathRecord one_share = simulate(cfg);
    CHECK(redraw.counts.logged() == 5000);
    CHECK(one_share.counts.logged() == 5000);
    CHECK_FALSE(redraw == one_share);
}
