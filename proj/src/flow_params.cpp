#include "lobq/flow_params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lobq/errors.hpp"

namespace lobq {

using nlohmann::json;

void FlowParams::validate_rates() const {
    auto check = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ParameterError(std::string(name) + " must be a finite nonnegative rate");
    };
    check(lambda0, "lambda0");
    check(lambda1, "lambda1");
    check(lambda2, "lambda2");
    check(mu, "mu");
    check(muA, "muA");
    check(theta1, "theta1");
    check(theta2, "theta2");
}

CalibratedThetas calibrate_thetas(double lambda1, double sigma1, double mu,
                                  double sigma_mu, double muA, double sigma_muA,
                                  double lambda2, double sigma2, double L1,
                                  double L2) {
    if (!(L1 > 0.0) || !(L2 > 0.0))
        throw ParameterError("average volumes L1 and L2 must be positive");
    double inflow = lambda1 * sigma1;
    double outflow = mu * sigma_mu + muA * sigma_muA;
    if (!(inflow > outflow))
        throw ParameterError(
            "infeasible flow balance at the best quote: inflow " +
            std::to_string(inflow) + " <= outflow " + std::to_string(outflow));
    if (!(lambda2 * sigma2 > 0.0))
        throw ParameterError("second-limit inflow lambda2*sigma2 must be positive");
    return CalibratedThetas{(inflow - outflow) / L1, lambda2 * sigma2 / L2};
}

ResurrectionMix resurrection_mix(const FlowParams& params, const DiscreteDist& pi2) {
    double beta = params.killing_rate();
    if (!(beta > 0.0))
        throw ParameterError(
            "lambda0 + muA must be positive: without killing events the "
            "resurrection distribution is undefined");
    if (pi2.support_offset != 1)
        throw ParameterError("second-limit volume law must live on {1, 2, ...}");

    DiscreteDist g0 = make_family_adaptive(params.g0_spec);
    if (g0.support_offset != 1)
        throw ParameterError("aggressive-limit size law must live on {1, 2, ...}");

    ResurrectionMix mix;
    mix.weight_limit = params.lambda0 / beta;
    mix.weight_market = params.muA / beta;

    std::size_t n = std::max(g0.probs.size(), pi2.probs.size());
    mix.h.support_offset = 1;
    mix.h.probs.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double g = k < g0.probs.size() ? g0.probs[k] : 0.0;
        double p = k < pi2.probs.size() ? pi2.probs[k] : 0.0;
        mix.h.probs[k] = mix.weight_limit * g + mix.weight_market * p;
    }
    mix.h.tail_mass = mix.weight_limit * g0.tail_mass + mix.weight_market * pi2.tail_mass;
    return mix;
}

namespace {

json family_to_json(const DistFamily& f) {
    json j;
    switch (f.kind) {
        case DistFamily::Kind::dirac_unit:
            j["kind"] = "dirac-unit";
            break;
        case DistFamily::Kind::geometric:
            j["kind"] = "geometric";
            j["q"] = f.q;
            break;
        case DistFamily::Kind::poisson:
            j["kind"] = "poisson";
            j["rate_ratio"] = f.rate_ratio;
            break;
        case DistFamily::Kind::negative_binomial:
            j["kind"] = "negative-binomial";
            j["size"] = f.size;
            j["prob"] = f.prob;
            break;
        case DistFamily::Kind::empirical:
            j["kind"] = "empirical";
            j["offset"] = f.empirical_dist.support_offset;
            j["weights"] = f.empirical_dist.probs;
            break;
    }
    return j;
}

DiscreteDist dist_from_json(const json& j) {
    DiscreteDist d;
    d.support_offset = j.value("offset", 1);
    d.probs = j.at("weights").get<std::vector<double>>();
    double s = d.sum();
    d.tail_mass = 1.0 - s;
    if (std::fabs(d.tail_mass) < 1e-9) d.tail_mass = std::max(d.tail_mass, 0.0);
    return DiscreteDist(d.support_offset, d.probs, d.tail_mass);
}

json dist_to_json(const DiscreteDist& d) {
    json j;
    j["offset"] = d.support_offset;
    j["weights"] = d.probs;
    return j;
}

DistFamily family_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "dirac-unit") return DistFamily::unit();
    if (kind == "geometric") return DistFamily::geometric(j.at("q").get<double>());
    if (kind == "poisson")
        return DistFamily::poisson(j.at("rate_ratio").get<double>());
    if (kind == "negative-binomial")
        return DistFamily::negative_binomial(j.at("size").get<double>(),
                                             j.at("prob").get<double>());
    if (kind == "empirical") return DistFamily::empirical(dist_from_json(j));
    throw ParameterError("unknown distribution kind '" + kind + "'");
}

}  // namespace

std::string params_to_json(const FlowParams& params) {
    json j;
    j["lambda0"] = params.lambda0;
    j["lambda1"] = params.lambda1;
    j["lambda2"] = params.lambda2;
    j["mu"] = params.mu;
    j["muA"] = params.muA;
    j["theta1"] = params.theta1;
    j["theta2"] = params.theta2;
    j["g0_spec"] = family_to_json(params.g0_spec);
    j["g1_spec"] = family_to_json(params.g1_spec);
    if (params.g2_spec) j["g2_spec"] = family_to_json(*params.g2_spec);
    if (params.pi2_override) j["pi2_override"] = dist_to_json(*params.pi2_override);
    json fits;
    if (params.fits.q0) fits["q0"] = *params.fits.q0;
    if (params.fits.q1) fits["q1"] = *params.fits.q1;
    if (params.fits.q2) fits["q2"] = *params.fits.q2;
    if (!fits.empty()) j["fits"] = fits;
    if (params.pi2_empirical) j["pi2_empirical"] = dist_to_json(*params.pi2_empirical);
    return j.dump(2) + "\n";
}

FlowParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("invalid parameter document: ") + e.what());
    }
    FlowParams p;
    try {
        p.lambda0 = j.value("lambda0", 0.0);
        p.lambda1 = j.value("lambda1", 0.0);
        p.lambda2 = j.value("lambda2", 0.0);
        p.mu = j.value("mu", 0.0);
        p.muA = j.value("muA", 0.0);
        p.theta1 = j.value("theta1", 0.0);
        p.theta2 = j.value("theta2", 0.0);
        if (j.contains("g0_spec")) p.g0_spec = family_from_json(j["g0_spec"]);
        if (j.contains("g1_spec")) p.g1_spec = family_from_json(j["g1_spec"]);
        if (j.contains("g2_spec"))
            p.g2_spec = family_from_json(j["g2_spec"]);
        else
            p.g2_spec.reset();
        if (j.contains("pi2_override"))
            p.pi2_override = dist_from_json(j["pi2_override"]);
        if (j.contains("fits")) {
            const json& f = j["fits"];
            if (f.contains("q0")) p.fits.q0 = f["q0"].get<double>();
            if (f.contains("q1")) p.fits.q1 = f["q1"].get<double>();
            if (f.contains("q2")) p.fits.q2 = f["q2"].get<double>();
        }
        if (j.contains("pi2_empirical"))
            p.pi2_empirical = dist_from_json(j["pi2_empirical"]);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("bad parameter document: ") + e.what());
    }
    p.validate_rates();
    return p;
}

void write_params_file(const std::string& path, const FlowParams& params) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << params_to_json(params);
    if (!out) throw IoError("failed writing " + path);
}

FlowParams read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return params_from_json(buf.str());
}

}  // namespace lobq
