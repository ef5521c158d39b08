// Run configuration: a sectioned key-value text format with unit suffixes.
// Unknown keys are errors. All frequencies in config files are ordinary
// frequencies in Hz (with kHz/MHz/GHz/THz suffixes); they are converted to
// angular frequencies here, at ingestion, and nowhere else.
//
// Example:
//
//     [pulse]
//     shape = gaussian
//     waist = 8.5 um
//     field_duration = 0.941 ps
//     detuning = -33 GHz
//     energy_sweep = 0.002 nJ : 0.2 nJ : 20
//
//     [protocol]
//     repetitions = 68500
//     seed = 1
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionpulse/protocol.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quantities.hpp"

namespace ionpulse {

struct RunConfig {
    // [constants]
    TransitionConstants constants = yb171_defaults();

    // [pulse]
    PulseShape shape = PulseShape::Gaussian;
    double waist_m = 8.5e-6;
    Duration field_duration = Duration(0.941e-12);
    std::optional<AngularFrequency> detuning; // explicit, or derived from a spectrum
    std::string spectrum_file;
    std::optional<double> reference_frequency_hz;
    double instrument_sigma_hz = 0.0;
    std::vector<Energy> energies;

    // [protocol]
    int repetitions = 68500;
    std::uint64_t seed = 1;
    int workers = 1;
    CycleTiming timing = default_cycle_timing();
    ExcitationMethod method = ExcitationMethod::ClosedForm;
    RabiSource rabi_source = RabiSource::Theory;
    double alpha = 0.0; // rad/s per sqrt(count)

    // [readout]
    ReadoutModel readout{1.3e5, 4.4e3, 0.0, 0.0};

    // [analysis]
    double counts_per_joule = 0.0;
    std::string mixture_mode = "calibrated"; // calibrated | cofit
    double n_sigma = 2.0;
    double sigma_t_eff_s = 0.0;
    double sigma_detuning_rad = 0.0;

    // [output]
    std::string out_dir = "out";
    std::string format = "csv"; // csv | json
};

RunConfig parse_config_text(const std::string& text, const std::string& source_name);
RunConfig load_config_file(const std::filesystem::path& file);

// Folds a configured spectrum file into explicit detuning and duration
// (loading and fitting the file). Commands resolve once, then echo.
RunConfig resolve_config(RunConfig config);

// Pulse template built from a resolved configuration; the energy field is
// left zero and filled per point.
PulseSpec resolved_pulse(const RunConfig& config);

// Simulation model assembled from the configuration.
ExperimentModel experiment_model(const RunConfig& config);

// Fully resolved configuration as JSON, embedded in every output so a run
// can be reproduced from its artifacts alone.
nlohmann::ordered_json config_echo(const RunConfig& config);
RunConfig config_from_echo(const nlohmann::ordered_json& echo);

} // namespace ionpulse
