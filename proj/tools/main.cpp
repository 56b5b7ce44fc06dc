// Command-line driver: estimate flow parameters from event logs, solve the
// analytic best-quote models, simulate the full mechanism, and compare model
// outputs against empirical distributions.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lobq/compare.hpp"
#include "lobq/discrete_dist.hpp"
#include "lobq/errors.hpp"
#include "lobq/estimation.hpp"
#include "lobq/flow_params.hpp"
#include "lobq/simulator.hpp"
#include "lobq/stationary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw lobq::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw lobq::IoError("failed writing " + path);
}

int run_solve(const std::string& model, const std::string& params_file,
              const std::string& out, unsigned truncation) {
    lobq::ModelId id = lobq::parse_model_id(model);
    lobq::FlowParams params = lobq::read_params_file(params_file);
    lobq::SolverOptions opts;
    if (truncation > 0) opts.max_states = truncation;
    lobq::StationaryResult result = lobq::solve_model(id, params, opts);
    lobq::write_distribution_file(out, result.pi);
    write_text_file(out + ".meta.json", lobq::stationary_metadata_json(result));
    return 0;
}

int run_simulate(const std::string& params_file, std::optional<double> horizon,
                 std::optional<std::uint64_t> events, std::uint64_t seed,
                 const std::string& weighting, const std::string& out_prefix,
                 const std::string& second_limit_mode,
                 const std::string& reset_policy) {
    lobq::SimConfig config;
    config.params = lobq::read_params_file(params_file);
    config.horizon_seconds = horizon;
    config.max_events = events;
    config.seed = seed;

    if (second_limit_mode == "coupled")
        config.second_limit_mode = lobq::SecondLimitMode::coupled_queue;
    else if (second_limit_mode == "resample")
        config.second_limit_mode = lobq::SecondLimitMode::resample_from_dist;
    else if (second_limit_mode == "auto")
        config.second_limit_mode =
            (config.params.pi2_override || config.params.pi2_empirical)
                ? lobq::SecondLimitMode::resample_from_dist
                : lobq::SecondLimitMode::coupled_queue;
    else
        throw lobq::ParameterError("bad --second-limit mode '" +
                                   second_limit_mode + "'");
    if (reset_policy == "stationary")
        config.reset_policy = lobq::SecondLimitReset::stationary_redraw;
    else if (reset_policy == "one-share")
        config.reset_policy = lobq::SecondLimitReset::one_share;
    else
        throw lobq::ParameterError("bad --reset policy '" + reset_policy + "'");

    bool want_time = weighting == "time" || weighting == "both";
    bool want_event = weighting == "event" || weighting == "both";
    if (!want_time && !want_event)
        throw lobq::ParameterError("bad --weighting '" + weighting +
                                   "' (expected time, event or both)");

    std::ofstream log_stream(out_prefix + ".events.csv");
    if (!log_stream)
        throw lobq::IoError("cannot open " + out_prefix + ".events.csv");
    lobq::EventLogWriter log(log_stream);
    lobq::PathRecord path = lobq::simulate(config, &log);
    log_stream.close();

    if (want_time)
        lobq::write_distribution_file(out_prefix + ".time.dist",
                                      lobq::histogram(path, lobq::Weighting::time));
    if (want_event)
        lobq::write_distribution_file(
            out_prefix + ".event.dist",
            lobq::histogram(path, lobq::Weighting::event));

    json meta;
    meta["rng"] = lobq::simulator_rng_name();
    meta["seed"] = seed;
    meta["total_time"] = path.total_time;
    meta["segments"] = path.segments.size();
    meta["events"] = {{"limit_spread", path.counts.limit_spread},
                      {"limit_best", path.counts.limit_best},
                      {"limit_book", path.counts.limit_book},
                      {"market_partial", path.counts.market_partial},
                      {"market_aggressive", path.counts.market_aggressive},
                      {"cancel_best", path.counts.cancel_best},
                      {"cancel_second", path.counts.cancel_second}};
    meta["model"] = "3";
    write_text_file(out_prefix + ".meta.json", meta.dump(2) + "\n");
    return 0;
}

int run_estimate(const std::string& log_file, const std::string& out,
                 const std::string& window, const std::string& emit_bestvol,
                 const std::string& snapshot_file) {
    std::vector<lobq::FlowEvent> events = lobq::ingest_file(log_file);
    if (events.empty()) throw lobq::IoError("no events in " + log_file);

    lobq::EstimateResult est;
    if (!window.empty()) {
        lobq::SessionWindow w = lobq::parse_session_window(window);
        auto sessions = lobq::split_sessions(events, w);
        if (sessions.empty())
            throw lobq::ParameterError("no events inside window " + window);
        est = lobq::estimate_sessions(sessions, w.end_sec - w.start_sec);
    } else {
        double duration = events.back().timestamp - events.front().timestamp;
        if (duration <= 0.0) duration = 1.0;  // single-instant log
        est = lobq::estimate(events, duration);
    }

    // Logs without the best_volume column cannot support the flow-balance
    // calibration on their own; a snapshot distribution of best-quote volumes
    // stands in for L1.
    std::string l1_source = est.stats.has_L1 ? "log" : "none";
    if (!est.stats.has_L1 && !snapshot_file.empty()) {
        lobq::DiscreteDist snap = lobq::read_distribution_file(snapshot_file);
        est.stats.L1 = lobq::mean(snap) / est.stats.rescale_factor;
        est.stats.has_L1 = est.stats.L1 > 0.0;
        l1_source = "snapshot";
        if (est.stats.has_L1 && est.stats.has_L2 && !est.stats.theta_calibrated &&
            est.params.lambda2 > 0.0) {
            lobq::CalibratedThetas thetas = lobq::calibrate_thetas(
                est.params.lambda1, est.stats.mean_sizes[1], est.params.mu,
                est.stats.mean_sizes[3], est.params.muA, est.stats.mean_sizes[4],
                est.params.lambda2, est.stats.mean_sizes[2], est.stats.L1,
                est.stats.L2);
            est.params.theta1 = thetas.theta1;
            est.params.theta2 = thetas.theta2;
            est.stats.theta_calibrated = true;
        }
    }

    lobq::write_params_file(out, est.params);

    json stats;
    stats["L1_source"] = l1_source;
    stats["duration"] = est.stats.duration;
    stats["rescale_factor"] = est.stats.rescale_factor;
    stats["rescale_rounding"] = "half-up, floor 1";
    stats["type0_only"] = est.stats.type0_only;
    stats["theta_calibrated"] = est.stats.theta_calibrated;
    const char* kind_keys[] = {"limit_spread", "limit_best", "limit_book",
                               "market_partial", "market_aggressive"};
    for (std::size_t k = 0; k < lobq::kNumEventKinds; ++k) {
        stats["counts"][kind_keys[k]] = est.stats.counts[k];
        stats["mean_sizes"][kind_keys[k]] = est.stats.mean_sizes[k];
    }
    if (est.stats.has_L1) stats["L1"] = est.stats.L1;
    if (est.stats.has_L2) stats["L2"] = est.stats.L2;
    write_text_file(out + ".stats.json", stats.dump(2) + "\n");

    if (!emit_bestvol.empty()) {
        if (!est.best_volume_dist)
            throw lobq::ParameterError(
                "log has no best_volume column; cannot emit the empirical law");
        lobq::write_distribution_file(emit_bestvol, *est.best_volume_dist);
    }
    return 0;
}

std::string model_name_for(const std::string& dist_file) {
    std::string meta_path = dist_file + ".meta.json";
    if (fs::exists(meta_path)) {
        std::ifstream in(meta_path);
        try {
            json j = json::parse(in);
            if (j.contains("model")) return j["model"].get<std::string>();
        } catch (...) {
            // fall through to the filename stem
        }
    }
    return fs::path(dist_file).stem().string();
}

int run_compare(const std::string& empirical_file,
                const std::vector<std::string>& model_files,
                const std::string& out_prefix) {
    lobq::DiscreteDist empirical = lobq::read_distribution_file(empirical_file);
    std::vector<std::string> names;
    std::vector<std::vector<lobq::DiscreteDist>> dists;
    for (const std::string& f : model_files) {
        lobq::DiscreteDist d = lobq::read_distribution_file(f);
        if (d.support_offset != empirical.support_offset)
            throw lobq::ParameterError(
                "support misalignment: " + f + " starts at " +
                std::to_string(d.support_offset) + " but " + empirical_file +
                " starts at " + std::to_string(empirical.support_offset));
        names.push_back(model_name_for(f));
        dists.push_back({std::move(d)});
    }
    std::string instrument = fs::path(empirical_file).stem().string();
    lobq::CompareReport report =
        lobq::build_compare_report({instrument}, {empirical}, names, dists);

    std::string text = lobq::render_compare_text(report);
    std::cout << text;
    write_text_file(out_prefix + ".txt", text);
    write_text_file(out_prefix + ".csv", lobq::render_compare_csv(report));

    // Plot-ready columns: absolute index, empirical mass, one column per model.
    {
        std::ostringstream os;
        os << "# index " << instrument;
        for (const auto& n : names) os << ' ' << n;
        os << '\n';
        int hi = empirical.max_index();
        for (const auto& row : dists) hi = std::max(hi, row[0].max_index());
        char buf[32];
        for (int i = empirical.support_offset; i <= hi; ++i) {
            os << i;
            std::snprintf(buf, sizeof(buf), " %.17g", empirical.at(i));
            os << buf;
            for (const auto& row : dists) {
                std::snprintf(buf, sizeof(buf), " %.17g", row[0].at(i));
                os << buf;
            }
            os << '\n';
        }
        write_text_file(out_prefix + ".plot.dat", os.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markovian best-quote models: estimation, analytic solving, "
                 "simulation and comparison"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "solve an analytic model");
    std::string model, params_file, solve_out;
    unsigned truncation = 0;
    solve->add_option("--model", model, "model id (0a 0b 1a 1b 1c 2a 2b 2c)")
        ->required();
    solve->add_option("--params", params_file, "parameter file (JSON)")->required();
    solve->add_option("--out", solve_out, "output distribution file")->required();
    solve->add_option("--truncation", truncation, "cap on the support size");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate the full mechanism");
    std::string sim_params, sim_out, weighting = "time";
    std::string second_limit_mode = "auto", reset_policy = "stationary";
    double horizon = -1.0;
    std::uint64_t events = 0, seed = 0;
    simulate->add_option("--params", sim_params, "parameter file (JSON)")->required();
    auto* horizon_opt =
        simulate->add_option("--horizon", horizon, "time horizon in seconds");
    auto* events_opt = simulate->add_option("--events", events, "event budget");
    simulate->add_option("--seed", seed, "RNG seed")->required();
    simulate->add_option("--weighting", weighting, "time | event | both");
    simulate->add_option("--second-limit", second_limit_mode,
                         "coupled | resample | auto");
    simulate->add_option("--reset", reset_policy,
                         "second-limit policy after promotion: stationary | one-share");
    simulate->add_option("--out", sim_out, "output prefix")->required();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "estimate parameters from a log");
    std::string log_file, est_out, window, emit_bestvol;
    estimate->add_option("--log", log_file, "event log (CSV)")->required();
    estimate->add_option("--out", est_out, "output parameter file")->required();
    auto* window_opt = estimate->add_option(
        "--window", window, "daily session window HH:MM-HH:MM (default 10:00-16:00)");
    window_opt->expected(0, 1);
    estimate->add_option("--emit-bestvol", emit_bestvol,
                         "also write the empirical best-quote volume law");
    std::string snapshot_file;
    estimate->add_option("--snapshot", snapshot_file,
                         "best-quote volume distribution standing in for L1 "
                         "when the log lacks volumes");

    // compare
    auto* compare = app.add_subcommand("compare", "rank model outputs");
    std::string empirical_file, cmp_out;
    std::vector<std::string> model_files;
    compare->add_option("--empirical", empirical_file, "empirical distribution file")
        ->required();
    compare->add_option("--models", model_files, "model distribution files")
        ->required()
        ->expected(-2);
    compare->add_option("--out", cmp_out, "output prefix")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_solve(model, params_file, solve_out, truncation);
        if (simulate->parsed())
            return run_simulate(
                sim_params,
                horizon_opt->count() ? std::optional<double>(horizon) : std::nullopt,
                events_opt->count() ? std::optional<std::uint64_t>(events)
                                    : std::nullopt,
                seed, weighting, sim_out, second_limit_mode, reset_policy);
        if (estimate->parsed()) {
            if (window_opt->count() > 0 && window.empty()) window = "10:00-16:00";
            return run_estimate(log_file, est_out, window, emit_bestvol,
                                snapshot_file);
        }
        if (compare->parsed())
            return run_compare(empirical_file, model_files, cmp_out);
    } catch (const lobq::Error& e) {
        std::cerr << "error (" << e.category_name() << "): " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
