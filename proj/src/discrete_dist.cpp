#include "lobq/discrete_dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lobq/errors.hpp"

namespace lobq {

namespace {

constexpr double kNormTol = 1e-9;

void check_invariants(const DiscreteDist& d) {
    if (d.support_offset != 0 && d.support_offset != 1)
        throw ParameterError("support_offset must be 0 or 1, got " +
                             std::to_string(d.support_offset));
    double total = d.tail_mass;
    for (double w : d.probs) {
        if (!(w >= 0.0))
            throw ParameterError("negative or NaN weight in distribution");
        total += w;
    }
    if (std::fabs(total - 1.0) > kNormTol)
        throw ParameterError("distribution mass " + std::to_string(total) +
                             " is not 1 within 1e-9");
}

}  // namespace

DiscreteDist::DiscreteDist(int offset, std::vector<double> weights, double tail)
    : support_offset(offset), probs(std::move(weights)), tail_mass(tail) {
    check_invariants(*this);
}

double DiscreteDist::sum() const {
    double s = 0.0;
    for (double w : probs) s += w;
    return s;
}

DiscreteDist DiscreteDist::shifted(int delta) const {
    DiscreteDist out;
    out.tail_mass = tail_mass;
    int new_offset = support_offset + delta;
    if (new_offset < 0)
        throw ParameterError("shift would move support below 0");
    if (new_offset <= 1) {
        out.support_offset = new_offset;
        out.probs = probs;
    } else {
        // Keep the {0,1} offset convention by padding with zeros.
        out.support_offset = 1;
        out.probs.assign(static_cast<std::size_t>(new_offset - 1), 0.0);
        out.probs.insert(out.probs.end(), probs.begin(), probs.end());
    }
    return out;
}

DiscreteDist DiscreteDist::normalized() const {
    double s = sum();
    if (s <= 0.0)
        throw ParameterError("cannot normalize a distribution with zero mass");
    DiscreteDist out;
    out.support_offset = support_offset;
    out.probs.reserve(probs.size());
    for (double w : probs) out.probs.push_back(w / s);
    out.tail_mass = 0.0;
    return out;
}

DiscreteDist DiscreteDist::trimmed(double eps) const {
    DiscreteDist out = *this;
    while (!out.probs.empty() && out.probs.back() <= eps) {
        out.tail_mass += out.probs.back();
        out.probs.pop_back();
    }
    return out;
}

DistFamily DistFamily::unit() {
    DistFamily f;
    f.kind = Kind::dirac_unit;
    return f;
}

DistFamily DistFamily::geometric(double q) {
    if (!(q > 0.0) || q > 1.0)
        throw ParameterError("geometric parameter must lie in (0, 1], got " +
                             std::to_string(q));
    DistFamily f;
    f.kind = Kind::geometric;
    f.q = q;
    return f;
}

DistFamily DistFamily::poisson(double rate_ratio) {
    if (!(rate_ratio >= 0.0))
        throw ParameterError("poisson mean must be >= 0");
    DistFamily f;
    f.kind = Kind::poisson;
    f.rate_ratio = rate_ratio;
    return f;
}

DistFamily DistFamily::negative_binomial(double size, double prob) {
    if (!(size > 0.0))
        throw ParameterError("negative-binomial size must be > 0");
    if (!(prob > 0.0 && prob < 1.0))
        throw ParameterError("negative-binomial prob must lie in (0, 1)");
    DistFamily f;
    f.kind = Kind::negative_binomial;
    f.size = size;
    f.prob = prob;
    return f;
}

DistFamily DistFamily::empirical(DiscreteDist d) {
    check_invariants(d);
    DistFamily f;
    f.kind = Kind::empirical;
    f.empirical_dist = std::move(d);
    return f;
}

double DistFamily::untruncated_mean() const {
    switch (kind) {
        case Kind::dirac_unit: return 1.0;
        case Kind::geometric: return 1.0 / q;
        case Kind::poisson: return rate_ratio;
        case Kind::negative_binomial: return size * (1.0 - prob) / prob;
        case Kind::empirical: return lobq::mean(empirical_dist);
    }
    return 0.0;
}

std::string DistFamily::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::dirac_unit: os << "dirac-unit"; break;
        case Kind::geometric: os << "geometric(q=" << q << ")"; break;
        case Kind::poisson: os << "poisson(" << rate_ratio << ")"; break;
        case Kind::negative_binomial:
            os << "negative-binomial(size=" << size << ", prob=" << prob << ")";
            break;
        case Kind::empirical:
            os << "empirical(" << empirical_dist.size() << " states)";
            break;
    }
    return os.str();
}

namespace {

double poisson_pmf(double rate, int k) {
    if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
}

double neg_binomial_pmf(double size, double prob, int k) {
    // P(k) = C(k+size-1, k) prob^size (1-prob)^k, k = 0, 1, ...
    double log_p = size * std::log(prob) + std::lgamma(k + size) -
                   std::lgamma(size) - std::lgamma(k + 1.0) +
                   k * std::log1p(-prob);
    return std::exp(log_p);
}

}  // namespace

DiscreteDist make_family(const DistFamily& family, std::size_t truncation_n) {
    if (truncation_n < 1)
        throw ParameterError("truncation length must be >= 1");

    DiscreteDist out;
    switch (family.kind) {
        case DistFamily::Kind::dirac_unit:
            out.support_offset = 1;
            out.probs.assign(truncation_n, 0.0);
            out.probs[0] = 1.0;
            break;
        case DistFamily::Kind::geometric: {
            double q = family.q;
            if (!(q > 0.0) || q > 1.0)
                throw ParameterError("geometric parameter must lie in (0, 1]");
            out.support_offset = 1;
            out.probs.resize(truncation_n);
            double w = q;  // g_1 = q, g_{i+1} = g_i (1-q)
            for (std::size_t i = 0; i < truncation_n; ++i) {
                out.probs[i] = w;
                w *= (1.0 - q);
            }
            break;
        }
        case DistFamily::Kind::poisson: {
            if (!(family.rate_ratio >= 0.0))
                throw ParameterError("poisson mean must be >= 0");
            out.support_offset = 0;
            out.probs.resize(truncation_n);
            for (std::size_t k = 0; k < truncation_n; ++k)
                out.probs[k] = poisson_pmf(family.rate_ratio, static_cast<int>(k));
            break;
        }
        case DistFamily::Kind::negative_binomial: {
            if (!(family.size > 0.0))
                throw ParameterError("negative-binomial size must be > 0");
            if (!(family.prob > 0.0 && family.prob < 1.0))
                throw ParameterError("negative-binomial prob must lie in (0, 1)");
            out.support_offset = 0;
            out.probs.resize(truncation_n);
            for (std::size_t k = 0; k < truncation_n; ++k)
                out.probs[k] =
                    neg_binomial_pmf(family.size, family.prob, static_cast<int>(k));
            break;
        }
        case DistFamily::Kind::empirical: {
            const DiscreteDist& e = family.empirical_dist;
            out.support_offset = e.support_offset;
            std::size_t n = std::min(truncation_n, e.probs.size());
            out.probs.assign(e.probs.begin(), e.probs.begin() + n);
            break;
        }
    }
    out.tail_mass = 1.0 - out.sum();
    if (out.tail_mass < 0.0 && out.tail_mass > -kNormTol) out.tail_mass = 0.0;
    check_invariants(out);
    return out;
}

DiscreteDist make_family_adaptive(const DistFamily& family, double tail_tol,
                                  std::size_t cap) {
    if (family.kind == DistFamily::Kind::empirical)
        return make_family(family, std::max<std::size_t>(family.empirical_dist.size(), 1));
    std::size_t n = 16;
    DiscreteDist d = make_family(family, std::min(n, cap));
    while (d.tail_mass >= tail_tol && n < cap) {
        n = std::min(n * 2, cap);
        d = make_family(family, n);
    }
    return d.trimmed();
}

double generating_function(const DiscreteDist& dist, double z) {
    if (std::fabs(z) > 1.0 + 1e-15)
        throw ParameterError("generating function requires |z| <= 1");
    // Horner evaluation over the stored block, then apply the offset.
    double acc = 0.0;
    for (auto it = dist.probs.rbegin(); it != dist.probs.rend(); ++it)
        acc = acc * z + *it;
    for (int i = 0; i < dist.support_offset; ++i) acc *= z;
    return acc;
}

double l2_distance(const DiscreteDist& a, const DiscreteDist& b) {
    int lo = std::min(a.support_offset, b.support_offset);
    int hi = std::max(a.max_index(), b.max_index());
    double ss = 0.0;
    for (int i = lo; i <= hi; ++i) {
        double d = a.at(i) - b.at(i);
        ss += d * d;
    }
    return std::sqrt(ss);
}

double mean(const DiscreteDist& dist) {
    double m = 0.0;
    for (std::size_t k = 0; k < dist.probs.size(); ++k)
        m += (dist.support_offset + static_cast<double>(k)) * dist.probs[k];
    return m;
}

void write_distribution(std::ostream& out, const DiscreteDist& dist) {
    char buf[64];
    for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        int idx = dist.support_offset + static_cast<int>(k);
        std::snprintf(buf, sizeof(buf), "%d %.17g\n", idx, dist.probs[k]);
        out << buf;
    }
}

void write_distribution_file(const std::string& path, const DiscreteDist& dist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_distribution(out, dist);
    if (!out) throw IoError("failed writing " + path);
}

DiscreteDist read_distribution(std::istream& in) {
    struct Entry { int index; double prob; };
    std::vector<Entry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Entry e{};
        if (!(ls >> e.index >> e.prob))
            throw ParseError(lineno, "expected 'index probability', got '" + line + "'");
        if (e.index < 0)
            throw ParseError(lineno, "negative index in distribution");
        entries.push_back(e);
    }
    if (entries.empty()) throw IoError("empty distribution input");

    int min_idx = entries.front().index;
    int max_idx = entries.front().index;
    for (const auto& e : entries) {
        min_idx = std::min(min_idx, e.index);
        max_idx = std::max(max_idx, e.index);
    }
    DiscreteDist out;
    out.support_offset = min_idx >= 1 ? 1 : 0;
    out.probs.assign(static_cast<std::size_t>(max_idx - out.support_offset + 1), 0.0);
    for (const auto& e : entries)
        out.probs[static_cast<std::size_t>(e.index - out.support_offset)] = e.prob;
    out.tail_mass = 1.0 - out.sum();
    if (std::fabs(out.tail_mass) < kNormTol) out.tail_mass = std::max(out.tail_mass, 0.0);
    check_invariants(out);
    return out;
}

DiscreteDist read_distribution_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_distribution(in);
}

}  // namespace lobq
