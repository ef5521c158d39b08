// ionpulse: simulate and analyze single-pulse coherent excitation of a
// trapped 171Yb+ ion.
//
// Exit codes: 0 success, 2 config error, 3 fit failure, 4 I/O error.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionpulse/commands.hpp"
#include "ionpulse/errors.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

ionpulse::RunConfig load(const CommonFlags& flags) {
    ionpulse::RunConfig config = ionpulse::load_config_file(flags.config_path);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    if (flags.format) config.format = *flags.format;
    return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "override protocol.seed");
    cmd->add_option("--out", flags.out_dir, "override output.directory");
    cmd->add_option("--format", flags.format, "override output.format (csv|json)")
        ->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-pulse excitation simulator and analysis toolkit"};
    app.require_subcommand(1);

    CommonFlags theory_flags, simulate_flags, analyze_flags, spectrum_flags;
    std::vector<std::string> analyze_inputs;
    std::string spectrum_file_flag;
    double reference_ghz = 0.0;
    bool reference_set = false;

    auto* theory = app.add_subcommand("theory", "peak intensity and theoretical Rabi frequency");
    add_common(theory, theory_flags, true);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo photon-count histograms");
    add_common(simulate, simulate_flags, true);

    auto* analyze = app.add_subcommand("analyze", "mixture + Rabi-curve fits of histograms");
    add_common(analyze, analyze_flags, false);
    analyze->add_option("inputs", analyze_inputs, "histogram JSON files")->required();

    auto* spectrum = app.add_subcommand("spectrum", "Gaussian fit of a measured spectrum");
    add_common(spectrum, spectrum_flags, true);
    spectrum->add_option("--file", spectrum_file_flag, "override pulse.spectrum_file");
    spectrum
        ->add_option_function<double>(
            "--reference",
            [&](double v) {
                reference_ghz = v;
                reference_set = true;
            },
            "override pulse.reference_frequency (GHz)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory->parsed()) {
            ionpulse::run_theory(load(theory_flags), std::cout);
        } else if (simulate->parsed()) {
            const auto config = load(simulate_flags);
            const auto written = ionpulse::run_simulate(config, config.out_dir);
            for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
        } else if (analyze->parsed()) {
            ionpulse::AnalyzeOverrides overrides;
            std::string out_dir = "out";
            if (!analyze_flags.config_path.empty()) {
                overrides.config = load(analyze_flags);
                out_dir = overrides.config->out_dir;
            }
            if (analyze_flags.out_dir) out_dir = *analyze_flags.out_dir;
            std::vector<std::filesystem::path> inputs(analyze_inputs.begin(),
                                                      analyze_inputs.end());
            ionpulse::run_analyze(inputs, overrides, out_dir, std::cout);
        } else if (spectrum->parsed()) {
            auto config = load(spectrum_flags);
            if (!spectrum_file_flag.empty()) config.spectrum_file = spectrum_file_flag;
            if (reference_set) config.reference_frequency_hz = reference_ghz * 1e9;
            ionpulse::run_spectrum(config, std::cout);
        }
    } catch (const ionpulse::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ionpulse::InvalidInput& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ionpulse::FitError& err) {
        std::cerr << "fit error: " << err.what() << "\n";
        return 3;
    } catch (const ionpulse::NonConvergence& err) {
        std::cerr << "fit error: " << err.what() << "\n";
        return 3;
    } catch (const ionpulse::IoError& err) {
        std::cerr << "io error: " << err.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "io error: " << err.what() << "\n";
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
