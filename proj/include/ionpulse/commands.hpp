// Subcommand implementations behind the CLI: theory, simulate, analyze,
// spectrum. Kept out of main() so the file outputs and reports are testable.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ionpulse/config.hpp"

namespace ionpulse {

// Per-energy table of peak intensity, theoretical Rabi frequency, square
// widths and pulse area.
void run_theory(const RunConfig& config, std::ostream& out);

// Simulates the configured energy scan and writes histograms.json and
// histograms.csv into out_dir. Returns the paths written.
std::vector<std::filesystem::path> run_simulate(const RunConfig& config,
                                                const std::filesystem::path& out_dir);

struct AnalyzeOverrides {
    // Replace the analysis/output sections of the embedded config echo.
    std::optional<RunConfig> config;
};

// Fits every histogram, scales bright weights to populations, fits the Rabi
// curve and writes rabi_points.csv, rabi_fit.json and rabi_band.csv.
// Mixture-fit failures are recorded per energy without aborting; a Rabi fit
// failure is reported in rabi_fit.json and rethrown after all files are
// written.
void run_analyze(const std::vector<std::filesystem::path>& histogram_files,
                 const AnalyzeOverrides& overrides, const std::filesystem::path& out_dir,
                 std::ostream& out);

// Gaussian fit of a measured spectrum: center, signed detuning, deconvolved
// width, transform-limited duration and effective square duration.
void run_spectrum(const RunConfig& config, std::ostream& out);

} // namespace ionpulse
