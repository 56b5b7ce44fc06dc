#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lobq/discrete_dist.hpp"

namespace lobq {

/// Geometric MLE fits carried alongside a parameter set, so one parameter
/// file can feed every model variant.
struct GeometricFits {
    std::optional<double> q0;
    std::optional<double> q1;
    std::optional<double> q2;
};

/// Full Poisson/exponential parameter set of the order-flow model.
/// Rates are per second; theta1/theta2 are per-share cancellation rates.
struct FlowParams {
    double lambda0 = 0.0;  // aggressive limit orders (inside the spread)
    double lambda1 = 0.0;  // limit orders at the best quote
    double lambda2 = 0.0;  // limit orders at the second limit
    double mu = 0.0;       // partial market orders (unit-sized)
    double muA = 0.0;      // aggressive market orders
    double theta1 = 0.0;
    double theta2 = 0.0;

    DistFamily g0_spec = DistFamily::unit();
    DistFamily g1_spec = DistFamily::unit();
    std::optional<DistFamily> g2_spec = DistFamily::unit();
    std::optional<DiscreteDist> pi2_override;

    GeometricFits fits;

    // Extra empirical material from estimation (not a model input per se):
    // the observed second-limit volume law, used by variant-c models and by
    // the resampling simulator.
    std::optional<DiscreteDist> pi2_empirical;

    double killing_rate() const { return lambda0 + muA; }

    void validate_rates() const;
};

/// Post-jump distribution of the best-quote volume: a convex mix of the
/// aggressive-limit size law and the second-limit volume law.
struct ResurrectionMix {
    DiscreteDist h;          // on {1, 2, ...}
    double weight_limit;     // lambda0 / (lambda0 + muA)
    double weight_market;    // muA / (lambda0 + muA)
};

/// Flow-balance calibration of the cancellation rates:
///   theta1 = (lambda1*sigma1 - mu*sigma_mu - muA*sigma_muA) / L1
///   theta2 = lambda2*sigma2 / L2
/// Throws ParameterError when the best-quote inflow surplus is nonpositive
/// (no stationary balance possible) or when L1/L2 are not positive.
struct CalibratedThetas {
    double theta1;
    double theta2;
};

CalibratedThetas calibrate_thetas(double lambda1, double sigma1, double mu,
                                  double sigma_mu, double muA, double sigma_muA,
                                  double lambda2, double sigma2, double L1,
                                  double L2);

/// Builds h = wL*g0 + wM*pi2 with wL = lambda0/(lambda0+muA).
/// Throws ParameterError when lambda0 + muA == 0 (no killing, the
/// resurrection law is undefined).
ResurrectionMix resurrection_mix(const FlowParams& params, const DiscreteDist& pi2);

/// JSON (de)serialization of the parameter document. Field names match the
/// struct members; distribution specs are nested objects.
std::string params_to_json(const FlowParams& params);
FlowParams params_from_json(const std::string& text);
void write_params_file(const std::string& path, const FlowParams& params);
FlowParams read_params_file(const std::string& path);

}  // namespace lobq
