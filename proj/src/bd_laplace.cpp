#include "lobq/bd_laplace.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lobq/errors.hpp"

namespace lobq {

namespace {

constexpr double kLentzTiny = 1e-300;
constexpr double kLentzTol = 1e-12;
constexpr int kLentzDepthCap = 100000;
constexpr double kRescaleThreshold = 1e250;

void validate(double s, const BirthDeathSpec& spec) {
    if (!(s > 0.0)) throw ParameterError("Laplace argument s must be > 0");
    if (!(spec.lambda1 >= 0.0) || !(spec.mu >= 0.0) || !(spec.theta1 > 0.0))
        throw ParameterError("birth-death rates must satisfy lambda1, mu >= 0, theta1 > 0");
}

/// Tail fraction T = a_2/(b_2 + a_3/(b_3 + ...)) shared by both branches,
/// with a_i = -lambda1 (mu + (base+i-1) theta1) and
/// b_i = s + lambda1 + mu + (base+i-1) theta1, evaluated by modified Lentz.
CFResult lentz_tail(int base, double s, const BirthDeathSpec& spec) {
    CFResult res;
    auto coef_a = [&](int i) {
        return -spec.lambda1 * (spec.mu + (base + i - 1) * spec.theta1);
    };
    auto coef_b = [&](int i) {
        return s + spec.lambda1 + spec.mu + (base + i - 1) * spec.theta1;
    };

    double f = kLentzTiny;
    double c = f;
    double d = 0.0;
    for (int i = 2; i <= kLentzDepthCap; ++i) {
        double a = coef_a(i);
        double b = coef_b(i);
        d = b + a * d;
        if (d == 0.0) d = kLentzTiny;
        c = b + a / c;
        if (c == 0.0) c = kLentzTiny;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        ++res.iterations;
        if (std::fabs(delta - 1.0) < kLentzTol) {
            res.value = f;
            res.converged = true;
            res.est_error = std::fabs(f) * std::fabs(delta - 1.0);
            return res;
        }
    }
    res.value = f;
    res.converged = false;
    res.est_error = std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace

double SignedLog::to_double() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_abs);
}

std::vector<SignedLog> bn_sequence(double s, int n, const BirthDeathSpec& spec) {
    validate(s, spec);
    if (n < 0) throw ParameterError("B_n index must be >= 0");

    std::vector<SignedLog> out(static_cast<std::size_t>(n) + 1);
    // Two running values under a shared log scale, renormalized as they grow.
    double prev = 1.0;          // B_0
    double cur = s + spec.lambda1;  // B_1
    double log_scale = 0.0;

    auto record = [&](int idx, double value) {
        SignedLog sl;
        if (value == 0.0) {
            sl.log_abs = -std::numeric_limits<double>::infinity();
            sl.sign = 0;
        } else {
            sl.log_abs = std::log(std::fabs(value)) + log_scale;
            sl.sign = value > 0.0 ? 1 : -1;
        }
        out[static_cast<std::size_t>(idx)] = sl;
    };

    record(0, prev);
    if (n >= 1) record(1, cur);
    for (int k = 2; k <= n; ++k) {
        double death = spec.mu + (k - 1) * spec.theta1;
        double next = (s + spec.lambda1 + death) * cur - spec.lambda1 * death * prev;
        prev = cur;
        cur = next;
        if (std::fabs(cur) > kRescaleThreshold) {
            double m = std::fabs(cur);
            log_scale += std::log(m);
            cur /= m;
            prev /= m;
        }
        record(k, cur);
    }
    return out;
}

SignedLog bn(double s, int n, const BirthDeathSpec& spec) {
    return bn_sequence(s, n, spec).back();
}

CFResult laplace_transition_with_bn(int m, int n, double s,
                                    const BirthDeathSpec& spec,
                                    const std::vector<SignedLog>& bn_seq,
                                    CFBranch branch) {
    validate(s, spec);
    if (m < 0 || n < 0) throw ParameterError("states must be nonnegative");
    if (branch == CFBranch::automatic)
        branch = (m <= n) ? CFBranch::lower : CFBranch::upper;
    if (branch == CFBranch::lower && m > n)
        throw ParameterError("lower branch requires m <= n");
    if (branch == CFBranch::upper && m < n)
        throw ParameterError("upper branch requires m >= n");

    int hi = std::max(m, n);
    if (bn_seq.size() < static_cast<std::size_t>(hi) + 2)
        throw ParameterError("B_n sequence too short for requested transition");

    // Both branches have the same shape:
    //   value = prefactor * B_lo / (B_{hi+1} + T * B_hi)
    // with T the shared Lentz tail anchored at hi.
    int lo = std::min(m, n);
    double log_prefactor;
    if (branch == CFBranch::lower) {
        if (spec.lambda1 == 0.0 && n > m) return CFResult{0.0, 0, true, 0.0};
        log_prefactor = (n - m) * std::log(spec.lambda1 == 0.0 ? 1.0 : spec.lambda1);
        if (spec.lambda1 == 0.0 && n == m) log_prefactor = 0.0;
    } else {
        log_prefactor = 0.0;
        for (int j = n + 1; j <= m; ++j)
            log_prefactor += std::log(spec.mu + j * spec.theta1);
    }

    const SignedLog& b_lo = bn_seq[static_cast<std::size_t>(lo)];
    const SignedLog& b_hi = bn_seq[static_cast<std::size_t>(hi)];
    const SignedLog& b_hi1 = bn_seq[static_cast<std::size_t>(hi) + 1];
    if (b_lo.sign <= 0 || b_hi.sign <= 0 || b_hi1.sign <= 0)
        throw ConvergenceError("B_n sequence lost positivity (s = " +
                               std::to_string(s) + ")");

    CFResult tail = lentz_tail(hi, s, spec);
    CFResult res;
    res.iterations = tail.iterations;
    if (!tail.converged) {
        res.value = 0.0;
        res.converged = false;
        throw ConvergenceError(
            "continued fraction did not converge within depth cap (m=" +
            std::to_string(m) + ", n=" + std::to_string(n) +
            ", partial tail value " + std::to_string(tail.value) + ")");
    }

    double denom = 1.0 + tail.value * std::exp(b_hi.log_abs - b_hi1.log_abs);
    if (!(denom > 0.0))
        throw ConvergenceError("continued-fraction denominator collapsed");
    double log_value = log_prefactor + b_lo.log_abs - b_hi1.log_abs;
    res.value = std::exp(log_value) / denom;
    res.converged = true;
    res.est_error = std::fabs(res.value) * kLentzTol +
                    tail.est_error * std::exp(b_lo.log_abs - b_hi1.log_abs);
    return res;
}

CFResult laplace_transition(int m, int n, double s, const BirthDeathSpec& spec,
                            CFBranch branch) {
    int hi = std::max(m, n);
    std::vector<SignedLog> seq = bn_sequence(s, hi + 1, spec);
    return laplace_transition_with_bn(m, n, s, spec, seq, branch);
}

}  // namespace lobq
