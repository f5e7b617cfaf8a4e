#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "idart/scenario.hpp"

namespace {

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed,
            const std::string& config_path, const std::string& out_dir) {
    using namespace idart::scenario;
    try {
        ScenarioScript script;
        if (is_builtin(scenario)) {
            script = builtin_scenario(scenario);
        } else {
            script = load_scenario_file(scenario);
        }
        if (seed) script.seed = *seed;

        RunConfig config;
        if (!config_path.empty()) config = load_config_file(config_path);

        const Report report = run_scenario(script, config, out_dir);
        std::cout << format_report(report);
        return 0;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iDART: simulated intruder detection and alert network"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario file or a builtin (fig1 fig2 fig3)");
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out_dir = "idart-out";
    run->add_option("scenario", scenario, "Scenario file path or builtin name")->required();
    run->add_option("--seed", seed, "Override the script's seed");
    run->add_option("--config", config_path, "Config file (key = value lines)");
    run->add_option("--out", out_dir, "Output directory for journal, outbox and clips");

    auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios");
    auto* show_config = app.add_subcommand("show-config", "Print the effective default config");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(scenario, seed, config_path, out_dir);
    if (scenarios->parsed()) {
        for (const auto& name : idart::scenario::builtin_names()) std::cout << name << '\n';
        return 0;
    }
    if (show_config->parsed()) {
        std::cout << idart::scenario::render_config(idart::scenario::RunConfig{});
        return 0;
    }
    return 1;
}
