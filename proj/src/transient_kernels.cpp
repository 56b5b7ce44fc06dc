#include "lobq/transient_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "lobq/errors.hpp"

namespace lobq {

namespace {

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

TransientKernel::TransientKernel(Variant v, double lambda1, double theta1, double q1)
    : variant_(v), lambda1_(lambda1), theta1_(theta1), q1_(q1) {
    if (!(lambda1 >= 0.0)) throw ParameterError("lambda1 must be >= 0");
    if (!(theta1 > 0.0)) throw ParameterError("theta1 must be > 0");
}

TransientKernel TransientKernel::unit_sizes(double lambda1, double theta1) {
    return TransientKernel(Variant::unit_sizes, lambda1, theta1, 1.0);
}

TransientKernel TransientKernel::geometric_sizes(double lambda1, double theta1,
                                                 double q1) {
    if (!(q1 > 0.0 && q1 < 1.0))
        throw ParameterError("geometric size parameter q1 must lie in (0, 1)");
    return TransientKernel(Variant::geometric_sizes, lambda1, theta1, q1);
}

std::vector<double> TransientKernel::zero_row(double decay, std::size_t len) const {
    std::vector<double> row(len, 0.0);
    if (len == 0) return row;
    if (variant_ == Variant::unit_sizes) {
        // Poisson with mean (lambda1/theta1)(1 - decay).
        double m = lambda1_ / theta1_ * (1.0 - decay);
        row[0] = std::exp(-m);
        for (std::size_t k = 1; k < len; ++k)
            row[k] = row[k - 1] * m / static_cast<double>(k);
        return row;
    }

    // Geometric sizes: power series of B(z)^c with B(z) = (n0 + n1 z)/(1 - w z),
    // n0 = q1 + w*decay, n1 = -w*decay, w = 1 - q1, c = lambda1/(theta1 w).
    // Logarithmic differentiation gives
    //   C'(z) (n0 + n1 z)(1 - w z) = c (n1 + w n0) C(z),
    // hence a three-term coefficient recurrence. Unlike expanding the two
    // binomial factors and convolving, this stays at machine precision for
    // large c (the factor expansions cancel catastrophically there).
    double w = 1.0 - q1_;
    double c = lambda1_ / (theta1_ * w);
    double n0 = q1_ + w * decay;
    double n1 = -w * decay;

    row[0] = std::exp(c * std::log(n0));
    if (len == 1) return row;
    double drive = c * (n1 + w * n0);  // = c w q1 (1 - decay) >= 0
    double cross = n1 - n0 * w;
    row[1] = drive * row[0] / n0;
    for (std::size_t m = 1; m + 1 < len; ++m) {
        double next = ((drive - static_cast<double>(m) * cross) * row[m] +
                       (static_cast<double>(m) - 1.0) * n1 * w * row[m - 1]) /
                      ((static_cast<double>(m) + 1.0) * n0);
        row[m + 1] = std::max(next, 0.0);
    }
    return row;
}

double TransientKernel::transition_with_zero_row(
    int i, int j, double decay, const std::vector<double>& zrow) const {
    if (i < 0 || j < 0) throw ParameterError("states must be nonnegative");
    if (static_cast<std::size_t>(j) >= zrow.size())
        throw ParameterError("zero_row too short for requested state");
    if (decay == 1.0) return i == j ? 1.0 : 0.0;

    double acc = 0.0;
    int kmax = std::min(i, j);
    double log_decay = decay > 0.0 ? std::log(decay) : 0.0;
    double log_keep = std::log1p(-decay);
    for (int k = 0; k <= kmax; ++k) {
        if (k > 0 && decay == 0.0) break;
        double lb = log_choose(i, k);
        if (k > 0) lb += k * log_decay;
        if (i - k > 0) lb += (i - k) * log_keep;
        acc += std::exp(lb) * zrow[static_cast<std::size_t>(j - k)];
    }
    return acc;
}

double TransientKernel::transition_from_decay(int i, int j, double decay) const {
    if (!(decay >= 0.0 && decay <= 1.0))
        throw ParameterError("decay must lie in [0, 1]");
    if (decay == 1.0) return i == j ? 1.0 : 0.0;
    std::vector<double> zrow = zero_row(decay, static_cast<std::size_t>(j) + 1);
    return transition_with_zero_row(i, j, decay, zrow);
}

double TransientKernel::transition(int i, int j, double t) const {
    if (!(t >= 0.0)) throw ParameterError("time must be >= 0");
    return transition_from_decay(i, j, std::exp(-theta1_ * t));
}

QueueGeneratorSpec QueueGeneratorSpec::best_quote(double lambda1, double mu,
                                                  double theta1,
                                                  const DiscreteDist& g1) {
    QueueGeneratorSpec s;
    s.lambda = lambda1;
    s.mu = mu;
    s.theta = theta1;
    s.sizes = g1;
    return s;
}

QueueGeneratorSpec QueueGeneratorSpec::second_limit(double lambda2, double theta2,
                                                    const DiscreteDist& g2) {
    QueueGeneratorSpec s;
    s.lambda = lambda2;
    s.mu = 0.0;
    s.theta = theta2;
    s.sizes = g2;
    return s;
}

TransitionOracle::TransitionOracle(const QueueGeneratorSpec& spec,
                                   std::size_t n_states)
    : n_(n_states) {
    if (n_ < 2) throw ParameterError("oracle needs at least 2 states");
    if (!(spec.lambda >= 0.0) || !(spec.mu >= 0.0) || !(spec.theta > 0.0))
        throw ParameterError("invalid generator rates");
    if (spec.sizes.support_offset != 1)
        throw ParameterError("batch-size law must live on {1, 2, ...}");

    uniform_rate_ =
        spec.lambda + spec.mu + static_cast<double>(n_ - 1) * spec.theta;
    if (uniform_rate_ <= 0.0) uniform_rate_ = 1.0;

    const std::vector<double>& g = spec.sizes.probs;
    int last = static_cast<int>(n_) - 1;

    row_ptr_.assign(n_ + 1, 0);
    std::vector<double> dense_row(n_, 0.0);
    for (int nstate = 0; nstate <= last; ++nstate) {
        std::fill(dense_row.begin(), dense_row.end(), 0.0);
        double out = 0.0;
        // Arrivals; overshoot and the size-law tail land on the last state.
        for (std::size_t k = 0; k < g.size(); ++k) {
            int target = std::min(nstate + 1 + static_cast<int>(k), last);
            if (target == nstate) continue;  // frozen at the boundary
            double rate = spec.lambda * g[k];
            dense_row[static_cast<std::size_t>(target)] += rate;
            out += rate;
        }
        if (spec.sizes.tail_mass > 0.0 && nstate != last) {
            double rate = spec.lambda * spec.sizes.tail_mass;
            dense_row[static_cast<std::size_t>(last)] += rate;
            out += rate;
        }
        if (nstate >= 1) {
            double death = spec.mu + nstate * spec.theta;
            dense_row[static_cast<std::size_t>(nstate - 1)] += death;
            out += death;
        }
        for (std::size_t cidx = 0; cidx < n_; ++cidx) {
            if (dense_row[cidx] != 0.0) {
                col_.push_back(static_cast<int>(cidx));
                val_.push_back(dense_row[cidx] / uniform_rate_);
            }
        }
        // Diagonal of P = I + Q/rate.
        col_.push_back(nstate);
        val_.push_back(1.0 - out / uniform_rate_);
        row_ptr_[static_cast<std::size_t>(nstate) + 1] = col_.size();
    }
}

std::vector<std::vector<double>> TransitionOracle::rows(
    const std::vector<int>& initial_states, double t) const {
    if (!(t >= 0.0)) throw ParameterError("time must be >= 0");
    for (int s : initial_states)
        if (s < 0 || static_cast<std::size_t>(s) >= n_)
            throw TruncationError("initial state " + std::to_string(s) +
                                  " outside truncated space of " +
                                  std::to_string(n_) + " states");

    std::size_t nrows = initial_states.size();
    std::vector<std::vector<double>> result(nrows, std::vector<double>(n_, 0.0));
    std::vector<std::vector<double>> block(nrows, std::vector<double>(n_, 0.0));
    for (std::size_t r = 0; r < nrows; ++r)
        block[r][static_cast<std::size_t>(initial_states[r])] = 1.0;

    double a = uniform_rate_ * t;
    if (a == 0.0) return block;

    const double log_a = std::log(a);
    const double tail_tol = 1e-16;
    // Upper summation bound: mean + wide Gaussian margin, floor for small a.
    std::size_t k_max =
        static_cast<std::size_t>(a + 12.0 * std::sqrt(a + 1.0) + 30.0);

    std::vector<double> next(n_, 0.0);
    double weight_used = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
        double lw = -a + static_cast<double>(k) * log_a - std::lgamma(k + 1.0);
        double wk = std::exp(lw);
        if (wk > 0.0) {
            for (std::size_t r = 0; r < nrows; ++r)
                for (std::size_t cidx = 0; cidx < n_; ++cidx)
                    result[r][cidx] += wk * block[r][cidx];
            weight_used += wk;
        }
        if (weight_used >= 1.0 - tail_tol) break;

        // Advance the block one uniformized step and watch for convergence.
        double max_diff = 0.0;
        for (std::size_t r = 0; r < nrows; ++r) {
            std::fill(next.begin(), next.end(), 0.0);
            const std::vector<double>& cur = block[r];
            for (std::size_t src = 0; src < n_; ++src) {
                double v = cur[src];
                if (v == 0.0) continue;
                for (std::size_t idx = row_ptr_[src]; idx < row_ptr_[src + 1]; ++idx)
                    next[static_cast<std::size_t>(col_[idx])] += v * val_[idx];
            }
            double diff = 0.0;
            for (std::size_t cidx = 0; cidx < n_; ++cidx)
                diff += std::fabs(next[cidx] - cur[cidx]);
            max_diff = std::max(max_diff, diff);
            block[r].swap(next);
        }
        if (max_diff < 1e-15 && k > a) {
            // Chain has numerically reached steady state: the remaining
            // Poisson mass multiplies an unchanging block.
            double remaining = 1.0 - weight_used;
            for (std::size_t r = 0; r < nrows; ++r)
                for (std::size_t cidx = 0; cidx < n_; ++cidx)
                    result[r][cidx] += remaining * block[r][cidx];
            weight_used = 1.0;
            break;
        }
    }
    return result;
}

std::vector<double> TransitionOracle::row(int initial_state, double t) const {
    return rows(std::vector<int>{initial_state}, t).front();
}

std::vector<std::vector<double>> TransitionOracle::matrix(double t) const {
    std::vector<int> states(n_);
    for (std::size_t i = 0; i < n_; ++i) states[i] = static_cast<int>(i);
    return rows(states, t);
}

}  // namespace lobq
