#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wavecompact/wavecompact.hpp"

namespace
{

enum ExitCode
{
    exit_ok = 0,
    exit_failure = 1,
    exit_unstable = 2,
    exit_config = 3,
};

wavecompact::ExperimentKind kind_of(const std::string& sub)
{
    using wavecompact::ExperimentKind;
    if (sub == "solve") return ExperimentKind::solve;
    if (sub == "converge") return ExperimentKind::converge;
    if (sub == "sharpness") return ExperimentKind::sharpness;
    if (sub == "oracle-check") return ExperimentKind::oracle_check;
    return ExperimentKind::stability_probe;
}

int run(const std::string& sub, const std::string& config_path, const std::string& out, std::optional<int> jobs)
{
    wavecompact::ExperimentConfig config;
    wavecompact::RunOptions options;
    try
    {
        config = wavecompact::load_config(config_path);
        if (config.kind != kind_of(sub))
        {
            throw wavecompact::ConfigError(std::string("config kind '") + wavecompact::to_string(config.kind) +
                                           "' does not match subcommand '" + sub + "'");
        }
        options.jobs = wavecompact::resolve_jobs(jobs);
        options.out_dir = out.empty() ? std::filesystem::path(config.out_dir) : std::filesystem::path(out);
    }
    catch (const wavecompact::StabilityError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_unstable;
    }
    catch (const wavecompact::Error& e)
    {
        // descriptor validation inside the config counts as a configuration error
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }

    try
    {
        const auto summary = wavecompact::run_experiment(config, options);
        std::cout << summary["results"].dump(2) << '\n';
        return exit_ok;
    }
    catch (const wavecompact::MeshTooCoarse& e)
    {
        std::cerr << "error: " << e.what() << " (minimal N " << e.minimal_n() << ")\n";
        return exit_unstable;
    }
    catch (const wavecompact::StabilityError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_unstable;
    }
    catch (const wavecompact::ConfigError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Compact fourth-order wave scheme experiments"};
    app.set_version_flag("--version", wavecompact::library_version);
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<int> jobs;
    for (const char* name : {"solve", "converge", "sharpness", "oracle-check", "stability-probe"})
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides out_dir)");
        sub->add_option("--jobs", jobs, "worker threads (default: WAVECOMPACT_JOBS or all cores)");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }
    return run(app.get_subcommands().front()->get_name(), config_path, out, jobs);
}
