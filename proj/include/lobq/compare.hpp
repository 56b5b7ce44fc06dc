#pragma once

#include <string>
#include <vector>

#include "lobq/discrete_dist.hpp"

namespace lobq {

/// L2 distances of model outputs to empirical laws, one column per
/// instrument, with per-model averages and a 1-based rank (1 = best fit).
struct CompareReport {
    struct Row {
        std::string model;
        std::vector<double> distances;  // per instrument
        double average = 0.0;
        int rank = 0;
    };

    std::vector<std::string> instruments;
    std::vector<Row> rows;  // in the caller's model order

    const Row& find(const std::string& model) const;
};

/// Builds the report; model_dists is indexed [model][instrument]. Ranks are
/// assigned by ascending average distance, ties broken by model name.
CompareReport build_compare_report(
    const std::vector<std::string>& instruments,
    const std::vector<DiscreteDist>& empirical,
    const std::vector<std::string>& model_names,
    const std::vector<std::vector<DiscreteDist>>& model_dists);

std::string render_compare_text(const CompareReport& report);
std::string render_compare_csv(const CompareReport& report);

}  // namespace lobq
