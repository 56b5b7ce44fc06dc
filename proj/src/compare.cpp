#include "lobq/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lobq/errors.hpp"

namespace lobq {

const CompareReport::Row& CompareReport::find(const std::string& model) const {
    for (const Row& r : rows)
        if (r.model == model) return r;
    throw ParameterError("no row for model '" + model + "' in report");
}

CompareReport build_compare_report(
    const std::vector<std::string>& instruments,
    const std::vector<DiscreteDist>& empirical,
    const std::vector<std::string>& model_names,
    const std::vector<std::vector<DiscreteDist>>& model_dists) {
    if (instruments.size() != empirical.size())
        throw ParameterError("instrument names and empirical laws differ in count");
    if (model_names.size() != model_dists.size())
        throw ParameterError("model names and outputs differ in count");
    if (model_names.empty()) throw ParameterError("nothing to compare");

    CompareReport report;
    report.instruments = instruments;
    for (std::size_t m = 0; m < model_names.size(); ++m) {
        if (model_dists[m].size() != instruments.size())
            throw ParameterError("model '" + model_names[m] +
                                 "' lacks outputs for every instrument");
        CompareReport::Row row;
        row.model = model_names[m];
        row.distances.reserve(instruments.size());
        for (std::size_t i = 0; i < instruments.size(); ++i)
            row.distances.push_back(l2_distance(model_dists[m][i], empirical[i]));
        row.average =
            std::accumulate(row.distances.begin(), row.distances.end(), 0.0) /
            static_cast<double>(row.distances.size());
        report.rows.push_back(std::move(row));
    }

    // Ranks: ascending average, ties by model name so output is deterministic.
    std::vector<std::size_t> order(report.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.rows[a].average != report.rows[b].average)
            return report.rows[a].average < report.rows[b].average;
        return report.rows[a].model < report.rows[b].model;
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        report.rows[order[pos]].rank = static_cast<int>(pos) + 1;
    return report;
}

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3E", v);
    return buf;
}

}  // namespace

std::string render_compare_text(const CompareReport& report) {
    std::ostringstream os;
    std::size_t name_w = 5;
    for (const auto& r : report.rows) name_w = std::max(name_w, r.model.size());
    os << std::string(name_w, ' ') << "  ";
    for (const auto& inst : report.instruments) {
        os << inst;
        if (inst.size() < 10) os << std::string(10 - inst.size(), ' ');
        os << ' ';
    }
    os << "Average    Rank\n";
    for (const auto& r : report.rows) {
        os << r.model << std::string(name_w - r.model.size(), ' ') << "  ";
        for (double d : r.distances) os << sci(d) << ' ';
        os << sci(r.average) << "  " << r.rank << '\n';
    }
    return os.str();
}

std::string render_compare_csv(const CompareReport& report) {
    std::ostringstream os;
    os << "model";
    for (const auto& inst : report.instruments) os << ',' << inst;
    os << ",average,rank\n";
    char buf[32];
    for (const auto& r : report.rows) {
        os << r.model;
        for (double d : r.distances) {
            std::snprintf(buf, sizeof(buf), "%.17g", d);
            os << ',' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", r.average);
        os << ',' << buf << ',' << r.rank << '\n';
    }
    return os.str();
}

}  // namespace lobq
