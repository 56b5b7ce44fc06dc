#include <doctest.h>

#include <cmath>
#include <random>

#include "lobq/errors.hpp"
#include "lobq/stationary.hpp"
#include "support/killed_oracle.hpp"

using namespace lobq;

namespace {

double linf(const DiscreteDist& a, const DiscreteDist& b) {
    int hi = std::max(a.max_index(), b.max_index());
    double worst = 0.0;
    for (int i = std::min(a.support_offset, b.support_offset); i <= hi; ++i)
        worst = std::max(worst, std::fabs(a.at(i) - b.at(i)));
    return worst;
}

FlowParams model1a_params() {
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

TEST_CASE("second-limit stationary laws") {
    // Unit sizes: 1 + Poisson(lambda2/theta2); at lambda2 = theta2 the first
    // state carries e^{-1}.
    DiscreteDist unit = second_limit_stationary_unit(1.0, 1.0);
    CHECK(unit.support_offset == 1);
    CHECK(unit.at(1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // Geometric sizes: negative binomial with size lambda2/((1-q2) theta2).
    DiscreteDist geo = second_limit_stationary_geometric(1.0, 1.0, 0.5);
    CHECK(geo.at(1) == doctest::Approx(0.25).epsilon(1e-12));

    // q2 -> 1 converges to the Poisson law.
    DiscreteDist near_unit = second_limit_stationary_geometric(1.0, 1.0, 1.0 - 1e-4);
    CHECK(linf(near_unit, unit) < 1e-3);

    DiscreteDist emp(1, {0.3, 0.7});
    CHECK(second_limit_stationary_empirical(emp) == emp);

    CHECK_THROWS_AS(second_limit_stationary_geometric(1.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(second_limit_stationary_geometric(0.0, 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(second_limit_stationary_empirical(DiscreteDist(0, {1.0})),
                    ParameterError);
}

TEST_CASE("type-0 with unit sizes and no market orders is exactly Poisson") {
    StationaryResult r = solve_type0(2.0, 0.0, 1.0, DistFamily::unit());
    DiscreteDist target = make_family_adaptive(DistFamily::poisson(2.0));
    CHECK(r.pi.support_offset == 0);
    CHECK(linf(r.pi, target) < 1e-10);
}

TEST_CASE("type-0 with unit sizes and market orders obeys detailed balance") {
    double lambda1 = 2.0, mu = 1.0, theta1 = 1.0;
    StationaryResult r = solve_type0(lambda1, mu, theta1, DistFamily::unit());
    for (int n = 0; n <= 12; ++n) {
        double expected = r.pi.at(0);
        for (int k = 1; k <= n; ++k) expected *= lambda1 / (mu + k * theta1);
        CHECK(std::fabs(r.pi.at(n) - expected) < 1e-12);
    }
}

TEST_CASE("type-0 integral seed agrees with recurrence renormalization") {
    Type0Solution sol = solve_type0_full(2.0, 1.0, 1.0, DistFamily::geometric(0.5));
    CHECK(std::fabs(sol.pi0_integral - sol.pi0_renormalized) < 1e-8);
    CHECK(sol.primary.normalization_defect < 1e-6);
}

TEST_CASE("type-0 matches the generator linear system") {
    for (auto [lambda1, mu, theta1, g1] :
         {std::tuple{2.0, 1.0, 1.0, DistFamily::geometric(0.5)},
          std::tuple{1.5, 0.4, 0.7, DistFamily::geometric(0.3)},
          std::tuple{3.0, 2.0, 1.3, DistFamily::unit()}}) {
        StationaryResult r = solve_type0(lambda1, mu, theta1, g1);
        DiscreteDist g = make_family_adaptive(g1, 1e-14);
        DiscreteDist h(1, {1.0});  // unused at beta = 0
        DiscreteDist oracle = testsupport::killed_generator_stationary(
            lambda1, mu, theta1, g, 0.0, h, 400);
        CHECK(linf(r.pi.shifted(1), oracle) < 1e-6);
    }
}

TEST_CASE("model 1 with no best-quote arrivals sticks to the resurrection law") {
    FlowParams p = model1a_params();
    p.lambda1 = 0.0;
    p.muA = 0.0;  // h = g0 = Dirac(1)
    StationaryResult r = solve_model1(ModelVariant::a, p);
    CHECK(r.pi.at(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model 1a matches the killed-generator linear system") {
    FlowParams p = model1a_params();
    StationaryResult r = solve_model1(ModelVariant::a, p);
    DiscreteDist pi2 = second_limit_stationary_unit(p.lambda2, p.theta2);
    ResurrectionMix mix = resurrection_mix(p, pi2);
    DiscreteDist g1 = make_family_adaptive(p.g1_spec);
    DiscreteDist oracle = testsupport::killed_generator_stationary(
        p.lambda1, 0.0, p.theta1, g1, p.killing_rate(), mix.h, 300);
    CHECK(linf(r.pi, oracle) < 1e-6);
    CHECK(r.normalization_defect < 1e-6);
}

TEST_CASE("model 1b matches the killed-generator linear system") {
    FlowParams p = model1a_params();
    p.g0_spec = DistFamily::geometric(0.5);
    p.g1_spec = DistFamily::geometric(0.45);
    p.g2_spec = DistFamily::geometric(0.6);
    StationaryResult r = solve_model1(ModelVariant::b, p);
    DiscreteDist pi2 = second_limit_stationary_geometric(p.lambda2, p.theta2, 0.6);
    ResurrectionMix mix = resurrection_mix(p, pi2);
    DiscreteDist g1 = make_family_adaptive(p.g1_spec, 1e-14);
    DiscreteDist oracle = testsupport::killed_generator_stationary(
        p.lambda1, 0.0, p.theta1, g1, p.killing_rate(), mix.h, 400);
    CHECK(linf(r.pi, oracle) < 1e-6);
}

TEST_CASE("model 1c consumes empirical inputs") {
    FlowParams p = model1a_params();
    p.g0_spec = DistFamily::empirical(DiscreteDist(1, {0.3, 0.2, 0.25, 0.15, 0.1}));
    p.g1_spec = DistFamily::geometric(0.5);
    p.pi2_override = DiscreteDist(1, {0.2, 0.3, 0.3, 0.1, 0.1});
    StationaryResult r = solve_model1(ModelVariant::c, p);
    DiscreteDist g1 = make_family_adaptive(p.g1_spec, 1e-14);
    ResurrectionMix mix = resurrection_mix(p, *p.pi2_override);
    DiscreteDist oracle = testsupport::killed_generator_stationary(
        p.lambda1, 0.0, p.theta1, g1, p.killing_rate(), mix.h, 400);
    CHECK(linf(r.pi, oracle) < 1e-6);
}

TEST_CASE("model 1 rejects partial market orders and dead killing") {
    FlowParams p = model1a_params();
    p.mu = 0.5;
    CHECK_THROWS_AS(solve_model1(ModelVariant::a, p), ParameterError);
    p = model1a_params();
    p.lambda0 = 0.0;
    p.muA = 0.0;
    CHECK_THROWS_AS(solve_model1(ModelVariant::a, p), ParameterError);
}

TEST_CASE("model 2a matches the killed-generator linear system") {
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
    StationaryResult r = solve_model2(ModelVariant::a, p);
    DiscreteDist pi2 = second_limit_stationary_unit(1.0, 1.0);
    ResurrectionMix mix = resurrection_mix(p, pi2);
    DiscreteDist g1 = make_family_adaptive(p.g1_spec);
    DiscreteDist oracle = testsupport::killed_generator_stationary(
        p.lambda1, p.mu, p.theta1, g1, p.killing_rate(), mix.h, 300);
    CHECK(linf(r.pi, oracle) < 1e-6);
    CHECK(std::fabs(r.pi.sum() + r.pi.tail_mass - 1.0) < 1e-9);
    CHECK(r.normalization_defect < 1e-6);
}

TEST_CASE("model 2 with mu = 0 reduces to model 1a") {
    FlowParams p = model1a_params();
    StationaryResult two = solve_model2(ModelVariant::a, p);
    StationaryResult one = solve_model1(ModelVariant::a, p);
    CHECK(linf(two.pi, one.pi) < 1e-6);
}

TEST_CASE("reduction lattice across models") {
    FlowParams base = model1a_params();
    StationaryResult ref = solve_model1(ModelVariant::a, base);

    FlowParams almost_unit = base;
    almost_unit.g0_spec = DistFamily::geometric(1.0 - 1e-6);
    almost_unit.g1_spec = DistFamily::geometric(1.0 - 1e-6);
    almost_unit.g2_spec = DistFamily::geometric(1.0 - 1e-6);
    CHECK(linf(solve_model1(ModelVariant::b, almost_unit).pi, ref.pi) < 1e-4);

    FlowParams tiny_mu = base;
    tiny_mu.mu = 1e-8;
    CHECK(linf(solve_model2(ModelVariant::a, tiny_mu).pi, ref.pi) < 1e-4);
}

TEST_CASE("resurrection weight vanishes smoothly with the aggressive rate") {
    FlowParams p = model1a_params();
    p.muA = 1e-6 * p.lambda0;
    StationaryResult with_market = solve_model1(ModelVariant::a, p);
    p.muA = 0.0;
    StationaryResult limit_only = solve_model1(ModelVariant::a, p);
    CHECK(linf(with_market.pi, limit_only.pi) < 1e-4);
}

TEST_CASE("solvers track the linear-system oracle across random parameters") {
    std::mt19937_64 rng(777);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>((rng() >> 11)) * 0x1.0p-53;
    };
    for (int rep = 0; rep < 8; ++rep) {
        FlowParams p;
        p.lambda0 = unif(0.1, 1.5);
        p.muA = unif(0.1, 1.0);
        p.lambda1 = unif(0.5, 3.0);
        p.theta1 = unif(0.5, 1.5);
        p.lambda2 = unif(0.5, 2.0);
        p.theta2 = unif(0.5, 1.5);
        double q0 = unif(0.3, 0.9);
        double q1 = unif(0.3, 0.9);
        double q2 = unif(0.3, 0.9);
        p.g0_spec = DistFamily::geometric(q0);
        p.g2_spec = DistFamily::geometric(q2);

        DiscreteDist pi2 =
            second_limit_stationary_geometric(p.lambda2, p.theta2, q2);
        ResurrectionMix mix = resurrection_mix(p, pi2);

        if (rep % 2 == 0) {
            p.mu = 0.0;
            p.g1_spec = DistFamily::geometric(q1);
            StationaryResult r = solve_model1(ModelVariant::b, p);
            DiscreteDist g1 = make_family_adaptive(p.g1_spec, 1e-14);
            DiscreteDist oracle = testsupport::killed_generator_stationary(
                p.lambda1, 0.0, p.theta1, g1, p.killing_rate(), mix.h, 400);
            CHECK(linf(r.pi, oracle) < 1e-6);
        } else {
            p.mu = unif(0.2, 1.5);
            p.g1_spec = DistFamily::unit();
            StationaryResult r = solve_model2(ModelVariant::b, p);
            DiscreteDist g1 = make_family(DistFamily::unit(), 2);
            DiscreteDist oracle = testsupport::killed_generator_stationary(
                p.lambda1, p.mu, p.theta1, g1, p.killing_rate(), mix.h, 400);
            CHECK(linf(r.pi, oracle) < 1e-6);
        }
    }
}

TEST_CASE("model id parsing and table resolution") {
    CHECK(parse_model_id("1b") == ModelId::m1b);
    CHECK(model_id_name(ModelId::m2c) == "2c");
    CHECK_THROWS_AS(parse_model_id("4x"), ParameterError);

    FlowParams p = model1a_params();
    p.mu = 0.7;
    p.g0_spec = DistFamily::empirical(DiscreteDist(1, {0.5, 0.5}));
    p.g1_spec = DistFamily::empirical(DiscreteDist(1, {0.7, 0.3}));
    p.fits.q0 = 0.5;
    p.fits.q1 = 0.6;
    p.fits.q2 = 0.7;
    p.pi2_empirical = DiscreteDist(1, {0.4, 0.6});

    FlowParams r1b = resolve_model_params(ModelId::m1b, p);
    CHECK(r1b.mu == 0.0);
    CHECK(r1b.g0_spec.kind == DistFamily::Kind::geometric);
    CHECK(r1b.g0_spec.q == doctest::Approx(0.5));

    FlowParams r2c = resolve_model_params(ModelId::m2c, p);
    CHECK(r2c.g1_spec.kind == DistFamily::Kind::dirac_unit);
    CHECK(r2c.pi2_override.has_value());

    FlowParams no_emp = model1a_params();
    no_emp.fits.q1 = 0.5;
    CHECK_THROWS_AS(resolve_model_params(ModelId::m1c, no_emp), ParameterError);

    FlowParams no_mu = model1a_params();  // mu = 0
    CHECK_THROWS_AS(resolve_model_params(ModelId::m2a, no_mu), ParameterError);
}

TEST_CASE("dispatcher reports type-0 on the shifted support") {
    FlowParams p;
    p.lambda1 = 2.0;
    p.mu = 1.0;
    p.theta1 = 1.0;
    p.g1_spec = DistFamily::unit();
    StationaryResult r = solve_model(ModelId::m0a, p);
    CHECK(r.pi.support_offset == 1);
    CHECK(r.model_id == "0a");
    StationaryResult queue = solve_type0(2.0, 1.0, 1.0, DistFamily::unit());
    CHECK(linf(r.pi, queue.pi.shifted(1)) == 0.0);
}

TEST_CASE("solver outputs are normalized nonnegative laws") {
    FlowParams p = model1a_params();
    p.mu = 0.7;
    for (const char* id : {"0a", "0b", "1a", "1b", "2a", "2b"}) {
        FlowParams q = p;
        q.fits.q0 = 0.5;
        q.fits.q1 = 0.55;
        q.fits.q2 = 0.6;
        StationaryResult r = solve_model(parse_model_id(id), q);
        double sum = 0.0;
        for (double w : r.pi.probs) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(sum > 1.0 - 1e-6);
        CHECK(sum < 1.0 + 1e-9);
    }
}
