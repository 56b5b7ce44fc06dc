#pragma once

#include <cstddef>
#include <vector>

#include "lobq/discrete_dist.hpp"

namespace lobq {

/// Closed-form transition probabilities r_ij(t) of the uninterrupted
/// best-quote queue Y (constant batch arrivals, per-share exponential
/// cancellation, no partial market orders).
///
/// Both supported size laws share the same structure: starting from i items,
/// the state at time t is (survivors of the initial i) + (an independent
/// draw of Y(t) started empty), so
///   r_ij(t) = sum_k Binom(i, k; e^{-theta1 t}) * zero_row[j - k].
/// For unit sizes zero_row is a Poisson law; for geometric sizes it is the
/// power-series expansion of the generating function
///   [ (q1 + (1-q1)(1-z) e^{-theta1 t}) / (1 - (1-q1) z) ]^{lambda1/(theta1 (1-q1))}.
class TransientKernel {
public:
    enum class Variant { unit_sizes, geometric_sizes };

    static TransientKernel unit_sizes(double lambda1, double theta1);
    static TransientKernel geometric_sizes(double lambda1, double theta1, double q1);

    Variant variant() const { return variant_; }
    double lambda1() const { return lambda1_; }
    double theta1() const { return theta1_; }
    double q1() const { return q1_; }

    /// r_ij(t): probability of moving from i to j items in time t.
    double transition(int i, int j, double t) const;

    /// Same with decay = e^{-theta1 t} as the primitive argument; used by the
    /// stationary solver where the Laplace substitution makes the decay the
    /// integration variable.
    double transition_from_decay(int i, int j, double decay) const;

    /// Law of Y(t) given Y(0) = 0, truncated to len entries (index = state).
    std::vector<double> zero_row(double decay, std::size_t len) const;

    /// Recombination against a precomputed zero_row (must have length > j).
    double transition_with_zero_row(int i, int j, double decay,
                                    const std::vector<double>& zero_row) const;

private:
    TransientKernel(Variant v, double lambda1, double theta1, double q1);

    Variant variant_;
    double lambda1_;
    double theta1_;
    double q1_;
};

/// Banded generator of a queue with Poisson batch arrivals and linear death:
/// arrival rate lambda with batch-size law `sizes`, death rate mu + n*theta
/// from state n >= 1 (and none from 0). Covers both the best-quote queue
/// (mu >= 0) and the second-limit queue (mu = 0).
struct QueueGeneratorSpec {
    double lambda = 0.0;
    double mu = 0.0;
    double theta = 1.0;
    DiscreteDist sizes;  // on {1, 2, ...}

    static QueueGeneratorSpec best_quote(double lambda1, double mu, double theta1,
                                         const DiscreteDist& g1);
    static QueueGeneratorSpec second_limit(double lambda2, double theta2,
                                           const DiscreteDist& g2);
};

/// Matrix exponential of the truncated generator via uniformization.
/// The state space is {0, ..., n_states-1}; arrivals that would overshoot are
/// redirected to the last state, which keeps every row of exp(tQ) stochastic.
class TransitionOracle {
public:
    TransitionOracle(const QueueGeneratorSpec& spec, std::size_t n_states);

    std::size_t n_states() const { return n_; }

    /// Rows of exp(tQ) for the given initial states.
    std::vector<std::vector<double>> rows(const std::vector<int>& initial_states,
                                          double t) const;

    std::vector<double> row(int initial_state, double t) const;

    /// Full n x n transition matrix exp(tQ).
    std::vector<std::vector<double>> matrix(double t) const;

private:
    std::size_t n_;
    double uniform_rate_;
    // CSR storage of the uniformized kernel P = I + Q/uniform_rate.
    std::vector<std::size_t> row_ptr_;
    std::vector<int> col_;
    std::vector<double> val_;
};

}  // namespace lobq
