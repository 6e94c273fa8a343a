// syncsim command-line front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "syncsim/config.hpp"
#include "syncsim/experiment.hpp"
#include "syncsim/trace.hpp"

#ifndef SYNCSIM_VERSION
#define SYNCSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace syncsim;

namespace {

constexpr int kConfigError = 2;
constexpr int kSimulationError = 3;
constexpr int kOtherError = 1;

std::vector<std::string> split_values(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_meta(const fs::path& dir, const ExperimentConfig& cfg, const std::string& command,
                const std::string& param, const std::vector<std::string>& values) {
    nlohmann::ordered_json meta;
    meta["tool"] = "syncsim";
    meta["version"] = SYNCSIM_VERSION;
    meta["command"] = command;
    if (!param.empty()) {
        meta["param"] = param;
        meta["values"] = values;
    }
    meta["config"] = nlohmann::json::parse(config_to_json(cfg));
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

ExperimentConfig load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for multi-point synchronization of fog controllers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SYNCSIM_VERSION);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int jobs = 1;

    auto* run = app.add_subcommand("run", "run one experiment configuration");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--seed", seed, "base seed; replication r uses seed + r");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "concurrent replications")->check(CLI::PositiveNumber);

    std::string param, values_csv;
    auto* sw = app.add_subcommand("sweep", "run one configuration per parameter value");
    sw->add_option("--config", config_path, "JSON config file")->required();
    sw->add_option("--param", param, "config key to vary")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    sw->add_option("--seed", seed, "base seed");
    sw->add_option("--out", out_dir, "output directory");
    sw->add_option("--jobs", jobs, "concurrent replications")->check(CLI::PositiveNumber);

    auto* graphs = app.add_subcommand("graphs", "write the task graphs a config generates");
    graphs->add_option("--config", config_path, "JSON config file")->required();
    graphs->add_option("--seed", seed, "base seed");
    graphs->add_option("--out", out_dir, "output directory");

    auto* trace = app.add_subcommand("trace", "mobility and duration trace utilities");
    trace->require_subcommand(1);
    std::string in_path, out_path;
    double interval = 30.0;
    auto* resample_cmd = trace->add_subcommand("resample", "resample a mobility CSV onto a fixed grid");
    resample_cmd->add_option("--in", in_path, "mobility CSV (node_id,timestamp,x,y)")->required();
    resample_cmd->add_option("--interval", interval, "grid step in seconds")->check(CLI::PositiveNumber);
    resample_cmd->add_option("--out", out_path, "output CSV (default stdout)");

    std::string kind = "durations";
    std::size_t count = 100;
    double min_s = 23.0, max_s = 269.0, duration_s = 86400.0, speed = 10.0;
    std::uint64_t trace_seed = 1;
    auto* export_cmd = trace->add_subcommand("export", "write a synthetic trace");
    export_cmd->add_option("--kind", kind, "durations or mobility")->check(CLI::IsMember({"durations", "mobility"}));
    export_cmd->add_option("--count", count, "durations: entries; mobility: nodes");
    export_cmd->add_option("--min", min_s, "durations: shortest task (s)");
    export_cmd->add_option("--max", max_s, "durations: longest task (s)");
    export_cmd->add_option("--duration", duration_s, "mobility: trace length (s)");
    export_cmd->add_option("--speed", speed, "mobility: speed (m/s)");
    export_cmd->add_option("--interval", interval, "mobility: sample step (s)")->check(CLI::PositiveNumber);
    export_cmd->add_option("--seed", trace_seed, "seed");
    export_cmd->add_option("--out", out_path, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    auto emit = [&](const std::string& text) {
        if (out_path.empty()) std::cout << text;
        else write_text_file(out_path, text);
    };

    ExperimentConfig cfg;
    std::vector<std::string> values;
    try {
        if (run->parsed() || sw->parsed() || graphs->parsed()) cfg = load_with_seed(config_path, seed);
        // graph files and duration traces belong to the config; surface their errors here
        if (run->parsed() || sw->parsed()) (void)build_graphs(cfg);
        if (sw->parsed()) {
            values = split_values(values_csv);
            if (values.empty()) throw ValidationError("values", "sweep needs at least one value");
            for (const auto& v : values) (void)with_parameter(cfg, param, v);
        }
        if (trace->parsed() || graphs->parsed()) {
            if (graphs->parsed()) {
                fs::create_directories(out_dir);
                for (const auto& g : build_graphs(cfg))
                    write_text_file(fs::path(out_dir) / (g.graph_id() + ".json"), task_graph_to_json(g) + "\n");
            } else if (resample_cmd->parsed()) {
                const auto samples = parse_mobility_csv(read_text_file(in_path));
                const auto grid = resample(samples, interval);
                emit(emit_mobility_csv(flatten(grid)));
            } else if (kind == "durations") {
                emit(emit_duration_csv(synth_duration_trace(count, min_s, max_s, trace_seed)));
            } else {
                emit(emit_mobility_csv(synth_mobility(count, duration_s, speed, trace_seed, interval)));
            }
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const UnknownParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return trace->parsed() ? kOtherError : kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOtherError;
    }

    RunOptions opts;
    opts.jobs = jobs;
    std::vector<AggregateReport> reports;
    std::string decisions;
    try {
        if (run->parsed()) {
            auto res = run_experiment(cfg, opts);
            reports.push_back(res.report);
            for (const auto& r : res.replications) decisions += decisions_jsonl(r.decisions);
        } else {
            auto res = sweep(cfg, param, values, opts);
            for (std::size_t i = 0; i < res.results.size(); ++i) {
                reports.push_back(res.results[i].report);
                for (const auto& r : res.results[i].replications) decisions += decisions_jsonl(r.decisions, values[i]);
            }
        }
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kSimulationError;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSimulationError;
    }

    try {
        fs::create_directories(out_dir);
        export_report(reports, ExportFormat::Csv, fs::path(out_dir) / "report.csv");
        write_text_file(fs::path(out_dir) / "decisions.jsonl", decisions);
        write_meta(out_dir, cfg, run->parsed() ? "run" : "sweep", param, values);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOtherError;
    }
    std::cout << report_csv(reports);
    return 0;
}
