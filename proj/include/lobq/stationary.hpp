#pragma once

#include <optional>
#include <string>

#include "lobq/discrete_dist.hpp"
#include "lobq/flow_params.hpp"

namespace lobq {

/// Analytic model catalog. Types 0 have no price moves (no aggressive
/// orders); type 1 has aggressive market orders only (mu = 0); type 2 allows
/// partial market orders but requires unit-sized best-quote limit orders.
/// Variants: a = unit sizes, b = geometric sizes, c = empirical inputs.
enum class ModelId { m0a, m0b, m1a, m1b, m1c, m2a, m2b, m2c };

ModelId parse_model_id(const std::string& text);
std::string model_id_name(ModelId id);

struct SolverOptions {
    std::size_t max_states = 2000;   // cap on the support of pi
    double mass_tol = 1e-8;          // stop once 1 - cum(pi) falls below this
    double quad_tol = 1e-10;         // absolute tolerance per Laplace integral
};

struct StationaryResult {
    DiscreteDist pi;
    std::string model_id;
    int truncation_n = 0;
    double quadrature_error = 0.0;
    double normalization_defect = 0.0;
};

/// Stationary volume at the second limit (the law feeding resurrections
/// after aggressive market orders), on {1, 2, ...}.
///   unit sizes      -> 1 + Poisson(lambda2/theta2)
///   geometric sizes -> 1 + NegBinomial(lambda2/((1-q2) theta2), q2)
DiscreteDist second_limit_stationary_unit(double lambda2, double theta2);
DiscreteDist second_limit_stationary_geometric(double lambda2, double theta2,
                                               double q2);
/// Empirical passthrough: validates the law lives on {1, 2, ...}.
DiscreteDist second_limit_stationary_empirical(const DiscreteDist& pi2);

/// Stationary law of the no-price-move benchmark queue on N (volume may
/// reach 0): forward recurrence seeded by the closed-form integral for pi_0.
struct Type0Solution {
    StationaryResult primary;      // integral-seeded recurrence
    DiscreteDist renormalized;     // recurrence from pi_0 = 1, normalized
    double pi0_integral = 0.0;
    double pi0_renormalized = 0.0;
};

Type0Solution solve_type0_full(double lambda1, double mu, double theta1,
                               const DistFamily& g1_spec,
                               const SolverOptions& opts = {});
StationaryResult solve_type0(double lambda1, double mu, double theta1,
                             const DistFamily& g1_spec,
                             const SolverOptions& opts = {});

/// The pi_0 normalization integral of the type-0 queue, exposed separately
/// so it can be checked against the recurrence route.
double type0_pi0_integral(double lambda1, double mu, double theta1,
                          const DistFamily& g1_spec, double quad_tol = 1e-12);

enum class ModelVariant { a, b, c };

/// Killed-and-resurrected best quote without partial market orders:
/// pi_j = beta * sum_i h_i * Laplace[r_{i-1,j-1}](beta), beta = lambda0+muA,
/// the Laplace transform computed by adaptive quadrature after substituting
/// the cancellation decay for time. Requires params.mu == 0.
StationaryResult solve_model1(ModelVariant variant, const FlowParams& params,
                              const SolverOptions& opts = {});

/// Killed-and-resurrected best quote with partial market orders and
/// unit-sized best-quote limit orders:
/// pi_j = beta * sum_m h_m * q_hat_{m-1,j-1}(beta) with continued-fraction
/// Laplace transforms. Requires a unit g1.
StationaryResult solve_model2(ModelVariant variant, const FlowParams& params,
                              const SolverOptions& opts = {});

/// Fills in the distribution specs mandated by the model id (unit for
/// a-variants, geometric fits for b, empirical inputs for c; mu forced to 0
/// for type 1) and clears the unused second-limit source.
FlowParams resolve_model_params(ModelId id, const FlowParams& params);

/// End-to-end solve for a model id. Type-0 results are shifted onto
/// {1, 2, ...} here so every model reports a best-quote volume law on the
/// same support (the queue law itself is available via solve_type0).
StationaryResult solve_model(ModelId id, const FlowParams& params,
                             const SolverOptions& opts = {});

/// Metadata sidecar (JSON) describing a solver output.
std::string stationary_metadata_json(const StationaryResult& result);

}  // namespace lobq
