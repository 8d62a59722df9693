#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ehsim/config.hpp"
#include "ehsim/report.hpp"

namespace {

namespace fs = std::filesystem;

bool log_enabled() {
    const char* v = std::getenv("EHSIM_LOG");
    if (!v) return false;
    const std::string_view level(v);
    return level == "debug" || level == "info" || level == "1";
}

void log_info(const std::string& msg) {
    if (log_enabled()) std::cerr << "[ehsim] " << msg << "\n";
}

// All failures end up on stderr as one JSON object so callers can parse them.
int fail(const std::string& type, const std::string& message) {
    nlohmann::ordered_json err;
    err["error"] = {{"type", type}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return type == "usage" || type == "config" ? 2 : 1;
}

struct CommonOptions {
    std::string config_path;
    std::string output_dir;
    std::string experiment;
    std::int64_t seed = -1;
    int days = 0;
};

// Config file first, then command-line overrides. A seed has to come from one
// of the two; everything else has defaults.
ehsim::RunConfig resolve_config(const CommonOptions& opts) {
    ehsim::RunConfig config;
    if (!opts.config_path.empty()) {
        config = ehsim::load_config(opts.config_path);
    } else {
        config = ehsim::default_config();
        if (opts.seed < 0) {
            throw ehsim::ConfigError("a seed is required: pass --seed or a config file");
        }
    }
    if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.days > 0) config.days = opts.days;
    if (!opts.experiment.empty()) config.experiment = opts.experiment;
    if (!opts.output_dir.empty()) config.output_dir = opts.output_dir;
    return config;
}

int cmd_generate(const CommonOptions& opts) {
    const ehsim::RunConfig config = resolve_config(opts);
    const auto traces = ehsim::materialize_traces(config);
    fs::create_directories(config.output_dir);
    for (const ehsim::LightTrace& t : traces) {
        const fs::path path = fs::path(config.output_dir) / (t.node_id + ".csv");
        ehsim::save_trace(t, path.string());
        log_info("wrote " + path.string());
        std::cout << path.string() << "  (" << t.days() << " days)\n";
    }
    return 0;
}

void write_experiment_files(const ehsim::RunConfig& config, const ehsim::ExperimentOutput& out) {
    ehsim::write_report_files(out.report, config.output_dir);
    const fs::path qdir = fs::path(config.output_dir) / "qtables";
    fs::create_directories(qdir);
    for (const auto& [name, table] : out.tables) {
        ehsim::save_qtable(table, config.hyper, (qdir / (name + ".json")).string());
    }
    std::ofstream snapshot(fs::path(config.output_dir) / "config.json", std::ios::binary);
    snapshot << ehsim::config_to_json(config);
}

int cmd_experiment(const CommonOptions& opts) {
    const ehsim::RunConfig config = resolve_config(opts);
    log_info("materializing " + std::to_string(config.traces.size()) + " traces");
    const auto traces = ehsim::materialize_traces(config);

    std::vector<std::string> arms;
    if (config.experiment == "all") {
        arms = {"daybyday", "dynamic", "shared", "transfer"};
    } else {
        arms = {config.experiment};
    }
    for (const std::string& arm : arms) {
        ehsim::RunConfig run = config;
        run.experiment = arm;
        if (arms.size() > 1) run.output_dir = (fs::path(config.output_dir) / arm).string();
        log_info("running experiment " + arm);
        const ehsim::ExperimentOutput out = ehsim::run_experiment(run, traces);
        // Everything is computed before the first byte is written, so a
        // failing run never leaves a half-finished report behind.
        write_experiment_files(run, out);
        std::cout << ehsim::summarize_report(out.report);
        std::cout << "report written to " << run.output_dir << "\n";
    }
    return 0;
}

ehsim::ExperimentReport load_report(const std::string& input) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + input);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return ehsim::report_from_json(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(input + ": " + e.what());
    }
}

// One report prints its own totals; with several, the first is the baseline
// and every other report gets a training-reduction column against it.
int cmd_report(const std::vector<std::string>& inputs) {
    std::vector<ehsim::ExperimentReport> reports;
    for (const std::string& input : inputs) reports.push_back(load_report(input));
    for (const ehsim::ExperimentReport& r : reports) std::cout << ehsim::summarize_report(r);

    if (reports.size() > 1) {
        const ehsim::ExperimentReport& base = reports.front();
        std::cout << "\nnode                              arm       trainings  baseline  reduction\n";
        for (std::size_t i = 1; i < reports.size(); ++i) {
            for (const ehsim::NodeSummary& n : reports[i].nodes) {
                for (const ehsim::NodeSummary& b : base.nodes) {
                    if (b.node_id != n.node_id) continue;
                    char line[160];
                    if (b.trainings_performed > 0) {
                        const double cut =
                            100.0 * (1.0 - static_cast<double>(n.trainings_performed) /
                                               static_cast<double>(b.trainings_performed));
                        std::snprintf(line, sizeof line, "%-33s %-9s %9ld %9ld  %8.1f%%\n",
                                      n.node_id.c_str(), n.arm.c_str(), n.trainings_performed,
                                      b.trainings_performed, cut);
                    } else {
                        std::snprintf(line, sizeof line, "%-33s %-9s %9ld %9ld       n/a\n",
                                      n.node_id.c_str(), n.arm.c_str(), n.trainings_performed,
                                      b.trainings_performed);
                    }
                    std::cout << line;
                    break;
                }
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-harvesting sensor node simulator and experiment runner"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::vector<std::string> report_inputs;

    auto add_common = [&opts](CLI::App* cmd, bool with_experiment) {
        cmd->add_option("--config", opts.config_path, "JSON run configuration")
            ->check(CLI::ExistingFile);
        cmd->add_option("--seed", opts.seed, "master seed (overrides the config)");
        cmd->add_option("--days", opts.days, "horizon in days (overrides the config)");
        cmd->add_option("--out", opts.output_dir, "output directory (overrides the config)");
        if (with_experiment) {
            cmd->add_option("--experiment", opts.experiment,
                            "daybyday | dynamic | shared | transfer | all")
                ->check(CLI::IsMember({"daybyday", "dynamic", "shared", "transfer", "all"}));
        }
    };

    CLI::App* generate = app.add_subcommand("generate", "write the configured traces as CSV files");
    add_common(generate, false);
    CLI::App* experiment = app.add_subcommand("experiment", "run an experiment and write a report");
    add_common(experiment, true);
    CLI::App* report = app.add_subcommand(
        "report", "summarize report.json files; extra files compare against the first");
    report->add_option("input", report_inputs, "paths to report.json files")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(opts);
        if (experiment->parsed()) return cmd_experiment(opts);
        if (report->parsed()) return cmd_report(report_inputs);
    } catch (const ehsim::ConfigError& e) {
        return fail("config", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return fail("usage", "no subcommand given");
}
