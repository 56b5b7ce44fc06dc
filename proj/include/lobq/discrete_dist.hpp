#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace lobq {

/// Probability distribution on the nonnegative integers, stored as a dense
/// block of weights starting at `support_offset` (0 or 1). `tail_mass` is the
/// probability lying beyond the stored block, so that
/// sum(probs) + tail_mass == 1 up to rounding.
struct DiscreteDist {
    int support_offset = 0;
    std::vector<double> probs;
    double tail_mass = 0.0;

    DiscreteDist() = default;
    DiscreteDist(int offset, std::vector<double> weights, double tail = 0.0);

    std::size_t size() const { return probs.size(); }
    int max_index() const { return support_offset + static_cast<int>(probs.size()) - 1; }

    /// Probability at absolute index `i` (0 outside the stored block).
    double at(int i) const {
        int k = i - support_offset;
        if (k < 0 || k >= static_cast<int>(probs.size())) return 0.0;
        return probs[static_cast<std::size_t>(k)];
    }

    double sum() const;

    /// Support shifted by `delta` (e.g. +1 maps a law of Y to the law of 1+Y).
    DiscreteDist shifted(int delta) const;

    /// Rescaled so the stored weights sum to exactly 1 (tail_mass dropped).
    DiscreteDist normalized() const;

    /// Drops trailing entries below `eps`, folding them into tail_mass.
    DiscreteDist trimmed(double eps = 0.0) const;

    bool operator==(const DiscreteDist&) const = default;
};

/// Parametric families for order-size and queue-volume distributions.
struct DistFamily {
    enum class Kind { dirac_unit, geometric, poisson, negative_binomial, empirical };

    Kind kind = Kind::dirac_unit;
    double q = 1.0;          // geometric success probability, in (0, 1]
    double rate_ratio = 0.0; // poisson mean
    double size = 0.0;       // negative-binomial size (> 0, possibly non-integer)
    double prob = 0.0;       // negative-binomial probability, in (0, 1)
    DiscreteDist empirical_dist;

    static DistFamily unit();
    static DistFamily geometric(double q);
    static DistFamily poisson(double rate_ratio);
    static DistFamily negative_binomial(double size, double prob);
    static DistFamily empirical(DiscreteDist d);

    /// Mean of the (untruncated) family; empirical uses the stored weights.
    double untruncated_mean() const;

    std::string describe() const;
};

/// Materializes the first `truncation_n` weights of a family.
/// tail_mass is set to 1 - sum(weights). Throws ParameterError on invalid
/// family parameters.
DiscreteDist make_family(const DistFamily& family, std::size_t truncation_n);

/// Truncation policy used project-wide when no explicit length is requested:
/// extend until tail_mass < 1e-10, hard cap 5000 states.
inline constexpr double kAdaptiveTailTol = 1e-10;
inline constexpr std::size_t kAdaptiveCap = 5000;

DiscreteDist make_family_adaptive(const DistFamily& family,
                                  double tail_tol = kAdaptiveTailTol,
                                  std::size_t cap = kAdaptiveCap);

/// Probability generating function sum_i p_i z^i over the stored support.
/// Requires |z| <= 1.
double generating_function(const DiscreteDist& dist, double z);

/// sqrt of the sum of squared pointwise differences, aligned by absolute
/// index; indices missing from one support count as probability 0.
double l2_distance(const DiscreteDist& a, const DiscreteDist& b);

/// sum_i i * p_i using absolute indices (tail ignored).
double mean(const DiscreteDist& dist);

/// Two-column text serialization: "index probability" per line.
void write_distribution(std::ostream& out, const DiscreteDist& dist);
void write_distribution_file(const std::string& path, const DiscreteDist& dist);
DiscreteDist read_distribution(std::istream& in);
DiscreteDist read_distribution_file(const std::string& path);

}  // namespace lobq
