#include <CLI11.hpp>

#include <iostream>

#include "osc/cli.hpp"

int main(int argc, char** argv) {
    using namespace osc::cli;
    CLI::App app{"Ordered weighted l1 subspace clustering"};
    app.require_subcommand(1);

    std::string config, out;
    std::uint64_t seed = 42;
    std::size_t replications = 0;
    std::vector<std::string> sets;
    std::vector<std::string> args;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "master seed (default 42)");
        cmd->add_option("--out", out, "output file");
        cmd->add_option("--set", sets, "override a configuration field (key=value, repeatable)");
        cmd->add_option("--replications", replications, "replications per sweep cell");
        cmd->add_option("args", args, "key=value fields (validate: suite name first)");
    };
    for (const char* name : {"generate", "cluster", "sweep", "validate"}) {
        add_common(app.add_subcommand(name));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::success : exit_code::usage;
    }

    RunSpec spec;
    try {
        const CLI::App* cmd = app.get_subcommands().front();
        spec.command = parse_command(cmd->get_name());
        if (!config.empty()) {
            spec.config_path = config;
        }
        if (!out.empty()) {
            spec.output_path = out;
        }
        if (cmd->count("--seed") > 0) {
            spec.seed = seed;
        }
        if (cmd->count("--replications") > 0) {
            spec.replications = replications;
        }
        auto positional = args.begin();
        if (spec.command == Command::validate && positional != args.end() && positional->find('=') == std::string::npos) {
            spec.suite = *positional++;
        }
        // Positional fields rank with --set; --set is applied last so it wins on conflicts.
        for (; positional != args.end(); ++positional) {
            const auto [k, v] = split_assignment(*positional);
            spec.overrides[k] = v;
        }
        for (const auto& s : sets) {
            const auto [k, v] = split_assignment(s);
            spec.overrides[k] = v;
        }
    } catch (const osc::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_code::usage;
    }
    return run(spec, std::cout, std::cerr);
}
