#include <doctest.h>

#include <cmath>

#include "lobq/discrete_dist.hpp"
#include "lobq/errors.hpp"
#include "lobq/transient_kernels.hpp"

using namespace lobq;

TEST_CASE("kernels start at the identity") {
    auto ka = TransientKernel::unit_sizes(2.0, 1.0);
    auto kb = TransientKernel::geometric_sizes(1.5, 0.8, 0.4);
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= 6; ++j) {
            CHECK(ka.transition(i, j, 0.0) == (i == j ? 1.0 : 0.0));
            CHECK(kb.transition(i, j, 0.0) == (i == j ? 1.0 : 0.0));
        }
}

TEST_CASE("unit-size kernel forgets its start and lands on the Poisson law") {
    double lambda1 = 2.0, theta1 = 1.0;
    auto k = TransientKernel::unit_sizes(lambda1, theta1);
    DiscreteDist target = make_family_adaptive(DistFamily::poisson(lambda1 / theta1));
    double t = 1e4 / theta1;
    for (int i : {0, 3, 11})
        for (int j = 0; j <= 15; ++j)
            CHECK(std::fabs(k.transition(i, j, t) - target.at(j)) < 1e-12);
}

TEST_CASE("unit-size kernel matches the generator exponential") {
    double lambda1 = 2.0, theta1 = 1.0;
    auto k = TransientKernel::unit_sizes(lambda1, theta1);
    DiscreteDist g1 = make_family(DistFamily::unit(), 2);
    TransitionOracle oracle(QueueGeneratorSpec::best_quote(lambda1, 0.0, theta1, g1),
                            400);
    auto row = oracle.row(3, 0.7);
    CHECK(std::fabs(k.transition(3, 1, 0.7) - row[1]) < 1e-8);
    double worst = 0.0;
    for (double t : {0.1, 1.0, 5.0})
        for (int i = 0; i <= 12; ++i) {
            auto r = oracle.row(i, t);
            for (int j = 0; j <= 25; ++j)
                worst = std::max(worst, std::fabs(k.transition(i, j, t) - r[j]));
        }
    CHECK(worst < 1e-8);
}

TEST_CASE("geometric kernel matches the generator exponential") {
    double lambda1 = 1.5, theta1 = 0.8, q1 = 0.4;
    auto k = TransientKernel::geometric_sizes(lambda1, theta1, q1);
    DiscreteDist g1 = make_family_adaptive(DistFamily::geometric(q1), 1e-16, 600);
    TransitionOracle oracle(QueueGeneratorSpec::best_quote(lambda1, 0.0, theta1, g1),
                            600);
    auto row = oracle.row(2, 1.0);
    CHECK(std::fabs(k.transition(2, 4, 1.0) - row[4]) < 1e-8);
}

TEST_CASE("geometric kernel is continuous in q1 at the unit-size boundary") {
    auto ka = TransientKernel::unit_sizes(2.0, 1.0);
    auto kb = TransientKernel::geometric_sizes(2.0, 1.0, 1.0 - 1e-8);
    double worst = 0.0;
    for (double t : {0.3, 1.1})
        for (int i = 0; i <= 15; ++i)
            for (int j = 0; j <= 15; ++j)
                worst = std::max(
                    worst, std::fabs(ka.transition(i, j, t) - kb.transition(i, j, t)));
    CHECK(worst < 1e-6);
}

TEST_CASE("Chapman-Kolmogorov composition for the unit-size kernel") {
    auto k = TransientKernel::unit_sizes(1.7, 0.9);
    for (double s : {0.3, 0.9})
        for (double t : {0.3, 0.9}) {
            double worst = 0.0;
            for (int i = 0; i <= 20; i += 5)
                for (int j = 0; j <= 20; j += 5) {
                    double acc = 0.0;
                    for (int mid = 0; mid <= 80; ++mid)
                        acc += k.transition(i, mid, s) * k.transition(mid, j, t);
                    worst = std::max(worst,
                                     std::fabs(acc - k.transition(i, j, s + t)));
                }
            CHECK(worst < 1e-7);
        }
}

TEST_CASE("kernel rows are stochastic") {
    auto ka = TransientKernel::unit_sizes(2.0, 1.0);
    auto kb = TransientKernel::geometric_sizes(1.5, 0.8, 0.4);
    for (const auto& k : {ka, kb})
        for (double t : {0.2, 1.0, 4.0})
            for (int i : {0, 4, 17}) {
                double s = 0.0;
                for (int j = 0; j < 300; ++j) s += k.transition(i, j, t);
                CHECK(std::fabs(s - 1.0) < 1e-8);
            }
}

TEST_CASE("oracle is the identity at t = 0 and keeps rows stochastic") {
    DiscreteDist g = make_family_adaptive(DistFamily::geometric(0.5), 1e-15, 400);
    TransitionOracle oracle(QueueGeneratorSpec::best_quote(1.0, 0.5, 1.0, g), 120);
    auto m0 = oracle.matrix(0.0);
    for (std::size_t i = 0; i < 120; ++i)
        for (std::size_t j = 0; j < 120; ++j)
            CHECK(m0[i][j] == (i == j ? 1.0 : 0.0));

    for (double t : {0.1, 1.0, 7.0})
        for (int i : {0, 3, 60, 119}) {
            auto row = oracle.row(i, t);
            double s = 0.0;
            for (double v : row) s += v;
            CHECK(std::fabs(s - 1.0) < 1e-10);
        }
}

TEST_CASE("second-limit generator relaxes to the Poisson law") {
    DiscreteDist g2 = make_family(DistFamily::unit(), 2);
    TransitionOracle oracle(QueueGeneratorSpec::second_limit(1.0, 1.0, g2), 120);
    DiscreteDist target = make_family_adaptive(DistFamily::poisson(1.0));
    auto row = oracle.row(5, 50.0);
    for (int j = 0; j <= 20; ++j)
        CHECK(std::fabs(row[static_cast<std::size_t>(j)] - target.at(j)) < 1e-9);
}

TEST_CASE("oracle truncation is monotone") {
    DiscreteDist g = make_family_adaptive(DistFamily::geometric(0.5), 1e-15, 400);
    QueueGeneratorSpec spec = QueueGeneratorSpec::best_quote(2.0, 0.3, 1.0, g);
    TransitionOracle small(spec, 100);
    TransitionOracle big(spec, 200);
    for (double t : {0.5, 2.0})
        for (int i : {0, 10, 40}) {
            auto a = small.row(i, t);
            auto b = big.row(i, t);
            for (int j = 0; j < 50; ++j)
                CHECK(std::fabs(a[static_cast<std::size_t>(j)] -
                                b[static_cast<std::size_t>(j)]) < 1e-9);
        }
}

TEST_CASE("oracle rejects states beyond the truncation") {
    DiscreteDist g = make_family(DistFamily::unit(), 2);
    TransitionOracle oracle(QueueGeneratorSpec::best_quote(1.0, 0.0, 1.0, g), 50);
    CHECK_THROWS_AS(oracle.row(50, 1.0), TruncationError);
}

TEST_CASE("kernel argument validation") {
    CHECK_THROWS_AS(TransientKernel::unit_sizes(1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(TransientKernel::geometric_sizes(1.0, 1.0, 1.0), ParameterError);
    auto k = TransientKernel::unit_sizes(1.0, 1.0);
    CHECK_THROWS_AS(k.transition(-1, 0, 1.0), ParameterError);
    CHECK_THROWS_AS(k.transition(0, 0, -1.0), ParameterError);
}
