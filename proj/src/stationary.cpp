#include "lobq/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "lobq/bd_laplace.hpp"
#include "lobq/errors.hpp"
#include "lobq/quadrature.hpp"
#include "lobq/transient_kernels.hpp"

namespace lobq {

ModelId parse_model_id(const std::string& text) {
    if (text == "0a") return ModelId::m0a;
    if (text == "0b") return ModelId::m0b;
    if (text == "1a") return ModelId::m1a;
    if (text == "1b") return ModelId::m1b;
    if (text == "1c") return ModelId::m1c;
    if (text == "2a") return ModelId::m2a;
    if (text == "2b") return ModelId::m2b;
    if (text == "2c") return ModelId::m2c;
    throw ParameterError("unknown model id '" + text +
                         "' (expected one of 0a 0b 1a 1b 1c 2a 2b 2c)");
}

std::string model_id_name(ModelId id) {
    switch (id) {
        case ModelId::m0a: return "0a";
        case ModelId::m0b: return "0b";
        case ModelId::m1a: return "1a";
        case ModelId::m1b: return "1b";
        case ModelId::m1c: return "1c";
        case ModelId::m2a: return "2a";
        case ModelId::m2b: return "2b";
        case ModelId::m2c: return "2c";
    }
    throw ParameterError("bad model id");
}

DiscreteDist second_limit_stationary_unit(double lambda2, double theta2) {
    if (!(lambda2 > 0.0) || !(theta2 > 0.0))
        throw ParameterError("second-limit rates lambda2, theta2 must be positive");
    return make_family_adaptive(DistFamily::poisson(lambda2 / theta2)).shifted(1);
}

DiscreteDist second_limit_stationary_geometric(double lambda2, double theta2,
                                               double q2) {
    if (!(lambda2 > 0.0) || !(theta2 > 0.0))
        throw ParameterError("second-limit rates lambda2, theta2 must be positive");
    if (!(q2 > 0.0 && q2 < 1.0))
        throw ParameterError("geometric q2 must lie in (0, 1), got " +
                             std::to_string(q2));
    double size = lambda2 / ((1.0 - q2) * theta2);
    return make_family_adaptive(DistFamily::negative_binomial(size, q2)).shifted(1);
}

DiscreteDist second_limit_stationary_empirical(const DiscreteDist& pi2) {
    if (pi2.support_offset != 1)
        throw ParameterError("empirical second-limit law must live on {1, 2, ...}");
    return pi2;
}

// ---------------------------------------------------------------------------
// Type-0 benchmark queue
// ---------------------------------------------------------------------------

namespace {

// Survival tails T_k = P(size > k) of a size law on {1, 2, ...}; the
// truncation tail_mass stays inside every T_k. These are the power-series
// coefficients of H(v) = (1 - G1(v)) / (1 - v).
std::vector<double> size_survival_tails(const DiscreteDist& g) {
    std::vector<double> tails(g.probs.size());
    double t = 1.0;
    for (std::size_t k = 0; k < g.probs.size(); ++k) {
        tails[k] = std::max(t, 0.0);
        t -= g.probs[k];
    }
    return tails;
}

// W(u) = int_u^1 H(v) dv = sum_k T_k (1 - u^{k+1}) / (k+1).
double type0_exponent_integral(const std::vector<double>& tails, double u) {
    double acc = 0.0;
    double upow = u;
    for (std::size_t k = 0; k < tails.size(); ++k) {
        acc += tails[k] * (1.0 - upow) / static_cast<double>(k + 1);
        upow *= u;
    }
    return acc;
}

struct RecurrenceOutcome {
    std::vector<double> pi;
    bool unstable = false;
};

// Forward balance recurrence of the type-0 queue, run from a given seed until
// the tail is exhausted or parasitic growth appears.
RecurrenceOutcome type0_recurrence(double seed, double lambda1, double mu,
                                   double theta1, const DiscreteDist& g1,
                                   std::size_t cap) {
    RecurrenceOutcome out;
    out.pi.push_back(seed);
    if (cap < 2 || lambda1 == 0.0) return out;
    out.pi.push_back(lambda1 * seed / (mu + theta1));

    double peak = std::max(out.pi[0], out.pi[1]);
    while (out.pi.size() < cap) {
        std::size_t n = out.pi.size() - 1;
        double conv = 0.0;
        std::size_t imax = std::min(n, g1.probs.size());
        for (std::size_t i = 1; i <= imax; ++i)
            conv += g1.probs[i - 1] * out.pi[n - i];
        double next = ((lambda1 + mu + static_cast<double>(n) * theta1) * out.pi[n] -
                       lambda1 * conv) /
                      (mu + static_cast<double>(n + 1) * theta1);
        if (!std::isfinite(next)) {
            out.unstable = true;
            break;
        }
        if (next <= 0.0) break;                   // tail exhausted (roundoff floor)
        if (next < peak * 1e-17) break;           // negligible remainder
        if (next > out.pi[n] && out.pi[n] < peak * 1e-10) break;  // parasitic growth
        out.pi.push_back(next);
        peak = std::max(peak, next);
    }
    return out;
}

DiscreteDist finish_distribution(std::vector<double> weights, int offset,
                                 double* defect_out) {
    double sum = 0.0;
    for (double w : weights) sum += w;
    double defect = 1.0 - sum;
    if (defect_out) *defect_out = std::fabs(defect);
    if (defect >= 0.0) return DiscreteDist(offset, std::move(weights), defect);
    if (defect > -1e-9) return DiscreteDist(offset, std::move(weights), 0.0);
    // Mass overshoot beyond the representable tolerance: deliver a valid
    // distribution and keep the defect in the metadata.
    for (double& w : weights) w /= sum;
    return DiscreteDist(offset, std::move(weights), 0.0);
}

}  // namespace

double type0_pi0_integral(double lambda1, double mu, double theta1,
                          const DistFamily& g1_spec, double quad_tol) {
    if (!(lambda1 > 0.0) || !(theta1 > 0.0) || !(mu >= 0.0))
        throw ParameterError("type-0 queue needs lambda1 > 0, theta1 > 0, mu >= 0");
    DiscreteDist g1 = make_family_adaptive(g1_spec);
    if (g1.support_offset != 1)
        throw ParameterError("size law must live on {1, 2, ...}");
    std::vector<double> tails = size_survival_tails(g1);
    double lt = lambda1 / theta1;

    if (mu == 0.0)
        return std::exp(-lt * type0_exponent_integral(tails, 0.0));

    double ratio = mu / theta1;
    int gamma = ratio >= 1.0 ? 1 : static_cast<int>(std::ceil(1.0 / ratio));
    double expo = gamma * ratio - 1.0;
    auto f = [&](double v) {
        double u = gamma == 1 ? v : std::pow(v, gamma);
        double w = expo == 0.0 ? 1.0 : std::pow(v, expo);
        return w * std::exp(lt * type0_exponent_integral(tails, u));
    };
    QuadratureResult qr = integrate(f, 0.0, 1.0, quad_tol);
    if (!qr.converged)
        throw ConvergenceError("type-0 normalization integral did not converge");
    double normalizer = ratio * gamma * qr.value;
    if (!(normalizer > 0.0))
        throw ConvergenceError("type-0 normalization integral is not positive");
    return 1.0 / normalizer;
}

Type0Solution solve_type0_full(double lambda1, double mu, double theta1,
                               const DistFamily& g1_spec,
                               const SolverOptions& opts) {
    if (!(lambda1 > 0.0) || !(theta1 > 0.0) || !(mu >= 0.0))
        throw ParameterError("type-0 queue needs lambda1 > 0, theta1 > 0, mu >= 0");
    DiscreteDist g1 = make_family_adaptive(g1_spec);

    Type0Solution sol;
    sol.pi0_integral = type0_pi0_integral(lambda1, mu, theta1, g1_spec);

    RecurrenceOutcome seeded =
        type0_recurrence(sol.pi0_integral, lambda1, mu, theta1, g1, opts.max_states);
    RecurrenceOutcome unit =
        type0_recurrence(1.0, lambda1, mu, theta1, g1, opts.max_states);
    if (seeded.unstable || unit.unstable)
        throw ConvergenceError("type-0 recurrence became numerically unstable");

    double unit_sum = 0.0;
    for (double w : unit.pi) unit_sum += w;
    if (!(unit_sum > 0.0) || !std::isfinite(unit_sum))
        throw ConvergenceError("type-0 recurrence failed to normalize");
    sol.pi0_renormalized = 1.0 / unit_sum;
    for (double& w : unit.pi) w /= unit_sum;
    sol.renormalized = finish_distribution(std::move(unit.pi), 0, nullptr);

    double defect = 0.0;
    DiscreteDist primary = finish_distribution(std::move(seeded.pi), 0, &defect);
    if (defect > 1e-6)
        throw ConvergenceError(
            "type-0 recurrence normalization defect " + std::to_string(defect) +
            " exceeds 1e-6 (divergent recurrence)");

    double seed_gap = std::fabs(sol.pi0_integral - sol.pi0_renormalized);
    sol.primary.pi = std::move(primary);
    sol.primary.model_id = "type0";
    sol.primary.truncation_n = static_cast<int>(sol.primary.pi.probs.size());
    sol.primary.quadrature_error = seed_gap;
    sol.primary.normalization_defect = defect;
    return sol;
}

StationaryResult solve_type0(double lambda1, double mu, double theta1,
                             const DistFamily& g1_spec, const SolverOptions& opts) {
    return solve_type0_full(lambda1, mu, theta1, g1_spec, opts).primary;
}

// ---------------------------------------------------------------------------
// Killing-and-resurrection models
// ---------------------------------------------------------------------------

namespace {

DiscreteDist second_limit_for(ModelVariant variant, const FlowParams& p) {
    if (p.muA == 0.0) {
        // Resurrections never come from the second limit; placeholder with
        // zero weight in the mix.
        return DiscreteDist(1, {1.0});
    }
    switch (variant) {
        case ModelVariant::a:
            return second_limit_stationary_unit(p.lambda2, p.theta2);
        case ModelVariant::b: {
            if (!p.g2_spec)
                throw ParameterError("variant b needs a g2 spec");
            if (p.g2_spec->kind == DistFamily::Kind::dirac_unit)  // q2 = 1 degenerate
                return second_limit_stationary_unit(p.lambda2, p.theta2);
            if (p.g2_spec->kind != DistFamily::Kind::geometric)
                throw ParameterError("variant b needs a geometric g2 spec");
            return second_limit_stationary_geometric(p.lambda2, p.theta2,
                                                     p.g2_spec->q);
        }
        case ModelVariant::c: {
            if (!p.pi2_override)
                throw ParameterError("variant c needs an empirical second-limit law");
            return second_limit_stationary_empirical(*p.pi2_override);
        }
    }
    throw ParameterError("bad variant");
}

void check_mix_usable(const ResurrectionMix& mix) {
    if (mix.h.tail_mass > 1e-9)
        throw TruncationError(
            "resurrection law tail mass " + std::to_string(mix.h.tail_mass) +
            " too heavy for the requested accuracy");
}

struct ZeroRowCache {
    const TransientKernel* kernel;
    std::size_t len;
    std::unordered_map<std::uint64_t, std::vector<double>> rows;

    const std::vector<double>& get(double decay) {
        std::uint64_t key;
        std::memcpy(&key, &decay, sizeof key);
        auto it = rows.find(key);
        if (it == rows.end())
            it = rows.emplace(key, kernel->zero_row(decay, len)).first;
        return it->second;
    }
};

struct MassLoop {
    std::vector<double> pi;
    double cum = 0.0;
    bool mass_converged = false;
};

}  // namespace

StationaryResult solve_model1(ModelVariant variant, const FlowParams& p,
                              const SolverOptions& opts) {
    p.validate_rates();
    if (p.mu != 0.0)
        throw ParameterError("model 1 assumes all market orders are aggressive (mu == 0)");
    double beta = p.killing_rate();
    if (!(beta > 0.0))
        throw ParameterError("model 1 needs a positive killing rate lambda0 + muA");

    TransientKernel kernel = [&] {
        if (variant == ModelVariant::a &&
            p.g1_spec.kind != DistFamily::Kind::dirac_unit)
            throw ParameterError("variant a needs unit-sized g1");
        // q1 = 1 degenerates the geometric size law to unit sizes.
        if (p.g1_spec.kind == DistFamily::Kind::dirac_unit)
            return TransientKernel::unit_sizes(p.lambda1, p.theta1);
        if (p.g1_spec.kind == DistFamily::Kind::geometric)
            return TransientKernel::geometric_sizes(p.lambda1, p.theta1,
                                                    p.g1_spec.q);
        throw ParameterError("model 1 needs a unit or geometric g1 spec");
    }();
    if (variant == ModelVariant::a &&
        p.g0_spec.kind != DistFamily::Kind::dirac_unit)
        throw ParameterError("variant a needs unit-sized g0");
    if (variant == ModelVariant::b &&
        p.g0_spec.kind != DistFamily::Kind::geometric &&
        p.g0_spec.kind != DistFamily::Kind::dirac_unit)
        throw ParameterError("variant b needs a geometric g0 spec");
    if (variant == ModelVariant::c &&
        p.g0_spec.kind != DistFamily::Kind::empirical)
        throw ParameterError("variant c needs an empirical g0");

    DiscreteDist pi2 = second_limit_for(variant, p);
    ResurrectionMix mix = resurrection_mix(p, pi2);
    check_mix_usable(mix);

    double ratio = beta / p.theta1;
    int gamma = ratio >= 1.0 ? 1 : static_cast<int>(std::ceil(1.0 / ratio));
    double expo = gamma * ratio - 1.0;
    double front = beta * gamma / p.theta1;

    double quad_err = 0.0;
    MassLoop loop;
    for (std::size_t cap = std::min<std::size_t>(256, opts.max_states);;
         cap = std::min(cap * 2, opts.max_states)) {
        loop = MassLoop{};
        quad_err = 0.0;
        ZeroRowCache cache{&kernel, cap, {}};
        for (std::size_t j = 1; j <= cap; ++j) {
            double pij = 0.0;
            for (std::size_t k = 0; k < mix.h.probs.size(); ++k) {
                double hi = mix.h.probs[k];
                if (hi < 1e-14) continue;
                int ystart = static_cast<int>(k);  // h index k -> volume k+1 -> Y state k
                int ytarget = static_cast<int>(j) - 1;
                auto f = [&](double v) {
                    double u = gamma == 1 ? v : std::pow(v, gamma);
                    double w = expo == 0.0 ? 1.0 : std::pow(v, expo);
                    return w * kernel.transition_with_zero_row(ystart, ytarget, u,
                                                               cache.get(u));
                };
                QuadratureResult qr = integrate(f, 0.0, 1.0, opts.quad_tol);
                if (!qr.converged)
                    throw ConvergenceError(
                        "Laplace quadrature failed to converge for transition (" +
                        std::to_string(ystart) + " -> " + std::to_string(ytarget) +
                        "), error estimate " + std::to_string(qr.error_estimate));
                pij += hi * qr.value;
                quad_err += hi * qr.error_estimate * front;
            }
            pij *= front;
            loop.pi.push_back(std::max(pij, 0.0));
            loop.cum += pij;
            if (1.0 - loop.cum < opts.mass_tol) {
                loop.mass_converged = true;
                break;
            }
        }
        if (loop.mass_converged || cap >= opts.max_states) break;
    }
    if (!loop.mass_converged && 1.0 - loop.cum > 1e-6)
        throw TruncationError("stationary mass " + std::to_string(loop.cum) +
                              " not recovered within " +
                              std::to_string(opts.max_states) + " states");

    StationaryResult res;
    res.pi = finish_distribution(std::move(loop.pi), 1, &res.normalization_defect);
    res.model_id = std::string("1") + (variant == ModelVariant::a   ? "a"
                                       : variant == ModelVariant::b ? "b"
                                                                    : "c");
    res.truncation_n = static_cast<int>(res.pi.probs.size());
    res.quadrature_error = quad_err;
    return res;
}

StationaryResult solve_model2(ModelVariant variant, const FlowParams& p,
                              const SolverOptions& opts) {
    p.validate_rates();
    if (p.g1_spec.kind != DistFamily::Kind::dirac_unit)
        throw ParameterError(
            "model 2 requires unit-sized limit orders at the best quote");
    double beta = p.killing_rate();
    if (!(beta > 0.0))
        throw ParameterError("model 2 needs a positive killing rate lambda0 + muA");
    if (variant == ModelVariant::a &&
        p.g0_spec.kind != DistFamily::Kind::dirac_unit)
        throw ParameterError("variant a needs unit-sized g0");
    if (variant == ModelVariant::b &&
        p.g0_spec.kind != DistFamily::Kind::geometric &&
        p.g0_spec.kind != DistFamily::Kind::dirac_unit)
        throw ParameterError("variant b needs a geometric g0 spec");
    if (variant == ModelVariant::c &&
        p.g0_spec.kind != DistFamily::Kind::empirical)
        throw ParameterError("variant c needs an empirical g0");

    DiscreteDist pi2 = second_limit_for(variant, p);
    ResurrectionMix mix = resurrection_mix(p, pi2);
    check_mix_usable(mix);

    BirthDeathSpec spec{p.lambda1, p.mu, p.theta1};
    int h_max = mix.h.max_index();

    double quad_err = 0.0;
    MassLoop loop;
    std::size_t cap = opts.max_states;
    std::vector<SignedLog> bn_seq =
        bn_sequence(beta, std::max<int>(h_max, 256) + 1, spec);

    for (std::size_t j = 1; j <= cap; ++j) {
        if (bn_seq.size() < j + 2)
            bn_seq = bn_sequence(beta, static_cast<int>(2 * j) + 1, spec);
        double pij = 0.0;
        for (std::size_t k = 0; k < mix.h.probs.size(); ++k) {
            double hm = mix.h.probs[k];
            if (hm < 1e-14) continue;
            CFResult cf = laplace_transition_with_bn(
                static_cast<int>(k), static_cast<int>(j) - 1, beta, spec, bn_seq);
            pij += hm * cf.value;
            quad_err += hm * cf.est_error * beta;
        }
        pij *= beta;
        loop.pi.push_back(std::max(pij, 0.0));
        loop.cum += pij;
        if (1.0 - loop.cum < opts.mass_tol) {
            loop.mass_converged = true;
            break;
        }
    }
    if (!loop.mass_converged && 1.0 - loop.cum > 1e-6)
        throw TruncationError("stationary mass " + std::to_string(loop.cum) +
                              " not recovered within " +
                              std::to_string(opts.max_states) + " states");

    StationaryResult res;
    res.pi = finish_distribution(std::move(loop.pi), 1, &res.normalization_defect);
    res.model_id = std::string("2") + (variant == ModelVariant::a   ? "a"
                                       : variant == ModelVariant::b ? "b"
                                                                    : "c");
    res.truncation_n = static_cast<int>(res.pi.probs.size());
    res.quadrature_error = quad_err;
    return res;
}

// ---------------------------------------------------------------------------
// Model resolution and dispatch
// ---------------------------------------------------------------------------

namespace {

double geometric_q_for(const DistFamily& spec, const std::optional<double>& fit,
                       const char* which) {
    if (spec.kind == DistFamily::Kind::geometric) return spec.q;
    if (fit) return *fit;
    throw ParameterError(std::string("no geometric parameter available for ") +
                         which + " (provide a geometric spec or a fitted q)");
}

DistFamily geometric_or_unit(double q) {
    if (q >= 1.0 - 1e-12) return DistFamily::unit();
    return DistFamily::geometric(q);
}

DiscreteDist empirical_pi2_for(const FlowParams& p) {
    if (p.pi2_override) return *p.pi2_override;
    if (p.pi2_empirical) return *p.pi2_empirical;
    throw ParameterError(
        "variant c needs an empirical second-limit law (pi2_override)");
}

DistFamily require_empirical_g0(const FlowParams& p) {
    if (p.g0_spec.kind != DistFamily::Kind::empirical)
        throw ParameterError("variant c needs an empirical g0 distribution");
    return p.g0_spec;
}

}  // namespace

FlowParams resolve_model_params(ModelId id, const FlowParams& params) {
    // Type-2 exists to model partial market orders; without them model 1
    // applies instead.
    if ((id == ModelId::m2a || id == ModelId::m2b || id == ModelId::m2c) &&
        !(params.mu > 0.0))
        throw ParameterError("type-2 models need a positive partial-market rate mu");
    FlowParams r = params;
    r.pi2_override.reset();
    r.pi2_empirical.reset();
    switch (id) {
        case ModelId::m0a:
            r.lambda0 = 0.0;
            r.muA = 0.0;
            r.g0_spec = DistFamily::unit();
            r.g1_spec = DistFamily::unit();
            r.g2_spec.reset();
            break;
        case ModelId::m0b:
            r.lambda0 = 0.0;
            r.muA = 0.0;
            r.g0_spec = DistFamily::unit();
            r.g1_spec = geometric_or_unit(
                geometric_q_for(params.g1_spec, params.fits.q1, "g1"));
            r.g2_spec.reset();
            break;
        case ModelId::m1a:
            r.mu = 0.0;
            r.g0_spec = DistFamily::unit();
            r.g1_spec = DistFamily::unit();
            r.g2_spec = DistFamily::unit();
            break;
        case ModelId::m1b:
            r.mu = 0.0;
            r.g0_spec = geometric_or_unit(
                geometric_q_for(params.g0_spec, params.fits.q0, "g0"));
            r.g1_spec = geometric_or_unit(
                geometric_q_for(params.g1_spec, params.fits.q1, "g1"));
            r.g2_spec = geometric_or_unit(
                geometric_q_for(params.g2_spec.value_or(DistFamily::unit()),
                                params.fits.q2, "g2"));
            break;
        case ModelId::m1c:
            r.mu = 0.0;
            r.g0_spec = require_empirical_g0(params);
            r.g1_spec = geometric_or_unit(
                geometric_q_for(params.g1_spec, params.fits.q1, "g1"));
            r.g2_spec.reset();
            r.pi2_override = empirical_pi2_for(params);
            break;
        case ModelId::m2a:
            r.g0_spec = DistFamily::unit();
            r.g1_spec = DistFamily::unit();
            r.g2_spec = DistFamily::unit();
            break;
        case ModelId::m2b:
            r.g0_spec = geometric_or_unit(
                geometric_q_for(params.g0_spec, params.fits.q0, "g0"));
            r.g1_spec = DistFamily::unit();
            r.g2_spec = geometric_or_unit(
                geometric_q_for(params.g2_spec.value_or(DistFamily::unit()),
                                params.fits.q2, "g2"));
            break;
        case ModelId::m2c:
            r.g0_spec = require_empirical_g0(params);
            r.g1_spec = DistFamily::unit();
            r.g2_spec.reset();
            r.pi2_override = empirical_pi2_for(params);
            break;
    }
    return r;
}

StationaryResult solve_model(ModelId id, const FlowParams& params,
                             const SolverOptions& opts) {
    FlowParams r = resolve_model_params(id, params);
    StationaryResult res;
    switch (id) {
        case ModelId::m0a:
        case ModelId::m0b: {
            res = solve_type0(r.lambda1, r.mu, r.theta1, r.g1_spec, opts);
            // Report on {1, 2, ...}: the protected last share shifts the
            // queue law by one, aligning all models on the same support.
            res.pi = res.pi.shifted(1);
            break;
        }
        case ModelId::m1a:
            res = solve_model1(ModelVariant::a, r, opts);
            break;
        case ModelId::m1b:
            res = solve_model1(ModelVariant::b, r, opts);
            break;
        case ModelId::m1c:
            res = solve_model1(ModelVariant::c, r, opts);
            break;
        case ModelId::m2a:
            res = solve_model2(ModelVariant::a, r, opts);
            break;
        case ModelId::m2b:
            res = solve_model2(ModelVariant::b, r, opts);
            break;
        case ModelId::m2c:
            res = solve_model2(ModelVariant::c, r, opts);
            break;
    }
    res.model_id = model_id_name(id);
    return res;
}

std::string stationary_metadata_json(const StationaryResult& result) {
    nlohmann::json j;
    j["model"] = result.model_id;
    j["truncation_N"] = result.truncation_n;
    j["quadrature_error"] = result.quadrature_error;
    j["normalization_defect"] = result.normalization_defect;
    j["support_offset"] = result.pi.support_offset;
    j["tail_mass"] = result.pi.tail_mass;
    return j.dump(2) + "\n";
}

}  // namespace lobq
