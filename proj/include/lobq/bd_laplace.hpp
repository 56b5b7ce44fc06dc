#pragma once

#include <vector>

namespace lobq {

/// Birth-death description of the best-quote queue under unit-sized orders:
/// constant birth rate lambda1, death rate mu + n*theta1 from state n.
struct BirthDeathSpec {
    double lambda1 = 0.0;
    double mu = 0.0;
    double theta1 = 1.0;
};

/// Log-magnitude plus sign representation for quantities that grow
/// super-exponentially (the B_n polynomials).
struct SignedLog {
    double log_abs;  // log(|value|); -inf encodes 0
    int sign;        // -1, 0, +1

    double to_double() const;
};

/// B_n(s) from the two-step recurrence
///   B_0 = 1, B_1 = s + lambda1,
///   B_n = (s + lambda1 + mu + (n-1) theta1) B_{n-1}
///         - lambda1 (mu + (n-1) theta1) B_{n-2}.
/// For s > 0 every B_n is positive; the returned sign tracks roundoff cases.
SignedLog bn(double s, int n, const BirthDeathSpec& spec);

/// All of B_0..B_n at once (cheaper when a whole family is needed).
std::vector<SignedLog> bn_sequence(double s, int n, const BirthDeathSpec& spec);

struct CFResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double est_error = 0.0;
};

enum class CFBranch { lower, upper, automatic };

/// Laplace transform q_hat_{m,n}(s) of the birth-death transition
/// probability q_{m,n}(t), evaluated by continued fractions (modified Lentz,
/// tolerance 1e-12, depth cap 1e5). `branch` selects the m<=n or m>=n
/// expansion; `automatic` picks by comparing m and n (either works at m == n).
/// Throws ConvergenceError on a non-converged fraction.
CFResult laplace_transition(int m, int n, double s, const BirthDeathSpec& spec,
                            CFBranch branch = CFBranch::automatic);

/// As above but reusing a precomputed B_0..B_max sequence
/// (requires max >= max(m, n) + 1).
CFResult laplace_transition_with_bn(int m, int n, double s,
                                    const BirthDeathSpec& spec,
                                    const std::vector<SignedLog>& bn_seq,
                                    CFBranch branch = CFBranch::automatic);

}  // namespace lobq
