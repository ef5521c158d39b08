// File formats emitted and consumed by the CLI: self-describing histogram
// JSON (config echo + seed + per-energy bin maps), flat histogram CSV, Rabi
// data CSV, and confidence-band CSV. Writers are deterministic: identical
// inputs produce byte-identical files.
#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "ionpulse/estimation.hpp"
#include "ionpulse/protocol.hpp"

namespace ionpulse {

struct SimulationOutput {
    nlohmann::ordered_json config_echo;
    std::uint64_t seed = 0;
    int repetitions = 0;
    std::vector<EnergyHistogram> points;
};

void write_histograms_json(const std::filesystem::path& file, const SimulationOutput& output);
SimulationOutput read_histograms_json(const std::filesystem::path& file);

// energy_j,count,occurrences
void write_histograms_csv(const std::filesystem::path& file, const SimulationOutput& output);

// c_sc,population,population_std_error
void write_rabi_points_csv(const std::filesystem::path& file,
                           std::span<const RabiDataPoint> points);
std::vector<RabiDataPoint> read_rabi_points_csv(const std::filesystem::path& file);

// c_sc,curve,lower,upper
void write_band_csv(const std::filesystem::path& file, const RabiCurveModel& model,
                    std::span<const BandPoint> band);

} // namespace ionpulse
