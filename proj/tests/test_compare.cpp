#include <doctest.h>

#include <cmath>

#include "lobq/compare.hpp"
#include "lobq/errors.hpp"
#include "lobq/simulator.hpp"
#include "lobq/stationary.hpp"

using namespace lobq;

TEST_CASE("identical output gets distance zero and rank 1") {
    DiscreteDist emp(1, {0.5, 0.3, 0.2});
    DiscreteDist other(1, {0.4, 0.4, 0.2});
    CompareReport report = build_compare_report({"X"}, {emp}, {"exact", "off"},
                                                {{emp}, {other}});
    CHECK(report.find("exact").distances[0] == 0.0);
    CHECK(report.find("exact").rank == 1);
    CHECK(report.find("off").rank == 2);
}

TEST_CASE("ranks follow average distance") {
    DiscreteDist emp(1, {1.0});
    DiscreteDist near(1, {0.9, 0.1});
    DiscreteDist far(1, {0.8, 0.2});
    CompareReport report =
        build_compare_report({"X"}, {emp}, {"far", "near"}, {{far}, {near}});
    CHECK(report.find("near").rank == 1);
    CHECK(report.find("far").rank == 2);
}

TEST_CASE("averages recompute from the per-instrument table") {
    DiscreteDist e1(1, {0.5, 0.5});
    DiscreteDist e2(1, {0.25, 0.75});
    DiscreteDist m1(1, {0.6, 0.4});
    DiscreteDist m2(1, {0.2, 0.8});
    CompareReport report =
        build_compare_report({"A", "B"}, {e1, e2}, {"m"}, {{m1, m2}});
    const auto& row = report.find("m");
    double recomputed = (row.distances[0] + row.distances[1]) / 2.0;
    CHECK(std::fabs(row.average - recomputed) < 1e-12);
}

TEST_CASE("ranks are a permutation with lexicographic ties") {
    DiscreteDist emp(1, {1.0});
    DiscreteDist same(1, {0.9, 0.1});
    CompareReport report = build_compare_report(
        {"X"}, {emp}, {"zeta", "alpha", "mid"}, {{same}, {same}, {emp}});
    std::vector<bool> seen(4, false);
    for (const auto& row : report.rows) {
        CHECK(row.rank >= 1);
        CHECK(row.rank <= 3);
        CHECK_FALSE(seen[static_cast<std::size_t>(row.rank)]);
        seen[static_cast<std::size_t>(row.rank)] = true;
    }
    CHECK(report.find("mid").rank == 1);
    // alpha and zeta tie on distance; the name breaks the tie.
    CHECK(report.find("alpha").rank == 2);
    CHECK(report.find("zeta").rank == 3);
}

TEST_CASE("report rendering carries every model and instrument") {
    DiscreteDist emp(1, {1.0});
    DiscreteDist m(1, {0.9, 0.1});
    CompareReport report = build_compare_report({"ACME"}, {emp}, {"1a"}, {{m}});
    std::string text = render_compare_text(report);
    CHECK(text.find("ACME") != std::string::npos);
    CHECK(text.find("1a") != std::string::npos);
    CHECK(text.find("Rank") != std::string::npos);
    std::string csv = render_compare_csv(report);
    CHECK(csv.find("model,ACME,average,rank") != std::string::npos);
    CHECK(csv.find("1a,") != std::string::npos);
}

TEST_CASE("shape mismatches are rejected") {
    DiscreteDist emp(1, {1.0});
    CHECK_THROWS_AS(build_compare_report({"A", "B"}, {emp}, {"m"}, {{emp}}),
                    ParameterError);
    CHECK_THROWS_AS(build_compare_report({"A"}, {emp}, {}, {}), ParameterError);
}

TEST_CASE("the generating model outranks the no-kill benchmarks on its own data") {
    FlowParams p;
    p.lambda0 = 0.5;
    p.muA = 0.5;
    p.lambda1 = 1.0;
    p.mu = 0.8;
    p.theta1 = 1.0;
    p.lambda2 = 1.0;
    p.theta2 = 1.0;
    p.g0_spec = DistFamily::unit();
    p.g1_spec = DistFamily::unit();
    p.g2_spec = DistFamily::unit();

    SimConfig cfg;
    cfg.params = p;
    cfg.max_events = 1000000;
    cfg.seed = 31;
    DiscreteDist empirical = histogram(simulate(cfg), Weighting::time);

    std::vector<std::string> names;
    std::vector<std::vector<DiscreteDist>> outs;
    for (const char* id : {"2a", "0a", "0b"}) {
        FlowParams q = p;
        q.fits.q1 = 0.999;  // 0b degenerates to near-unit sizes
        names.push_back(id);
        outs.push_back({solve_model(parse_model_id(id), q).pi});
    }
    CompareReport report =
        build_compare_report({"synthetic"}, {empirical}, names, outs);
    CHECK(report.find("2a").rank == 1);
    CHECK(report.find("2a").average < report.find("0a").average);
    CHECK(report.find("2a").average < report.find("0b").average);
}
