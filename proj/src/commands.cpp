#include "ionpulse/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "ionpulse/dynamics.hpp"
#include "ionpulse/estimation.hpp"
#include "ionpulse/io.hpp"

namespace ionpulse {

namespace {

// Mean counts of the bright and dark components implied by the readout
// model, used as the calibration for calibrated-mode mixture fits.
std::pair<double, double> calibration_means(const ReadoutModel& readout,
                                            const CycleTiming& timing) {
    const double t = timing.readout.seconds();
    const double dark = readout.dark_rate * t;
    const double bright = (readout.bright_rate + readout.dark_rate) * t;
    return {bright, dark};
}

} // namespace

void run_theory(const RunConfig& raw_config, std::ostream& out) {
    const RunConfig config = resolve_config(raw_config);
    const PulseSpec pulse = resolved_pulse(config);
    if (config.energies.empty())
        throw ConfigError("pulse.energy (or energies/energy_sweep) is required");

    const Duration t_eff = pulse.shape == PulseShape::Gaussian
                               ? effective_square_duration(pulse.shape_duration)
                               : pulse.shape_duration;
    const Duration t_p = pulse.shape == PulseShape::Gaussian
                             ? equivalent_square_width_for_intensity(pulse.shape_duration)
                             : pulse.shape_duration;

    out << "detuning_rad_per_s " << pulse.detuning.radians_per_second() << "\n"
        << "t_p_s " << t_p.seconds() << "\n"
        << "t_eff_s " << t_eff.seconds() << "\n";
    out << "energy_j,peak_intensity_w_per_m2,omega_th_rad_per_s,pulse_area,p_excite\n";
    for (const auto& energy : config.energies) {
        PulseSpec square = pulse;
        square.shape = PulseShape::Rectangular;
        square.shape_duration = t_p;
        square.energy = energy;
        const Intensity ip = peak_intensity(square);
        const AngularFrequency omega = theoretical_rabi(config.constants, ip);
        const double area = pulse_area(omega, t_eff);
        const double p = excitation_probability_rect({omega, pulse.detuning, t_eff});
        out << energy.joules() << ',' << ip.watts_per_m2() << ','
            << omega.radians_per_second() << ',' << area << ',' << p << '\n';
    }
}

std::vector<std::filesystem::path> run_simulate(const RunConfig& raw_config,
                                                const std::filesystem::path& out_dir) {
    const RunConfig config = resolve_config(raw_config);
    if (config.energies.empty())
        throw ConfigError("pulse.energy (or energies/energy_sweep) is required");
    const ExperimentModel model = experiment_model(config);

    SimulationOutput output;
    output.config_echo = config_echo(config);
    output.seed = config.seed;
    output.repetitions = config.repetitions;
    output.points = run_experiment(config.energies, model, config.repetitions, config.seed);

    std::filesystem::create_directories(out_dir);
    const auto json_path = out_dir / "histograms.json";
    const auto csv_path = out_dir / "histograms.csv";
    write_histograms_json(json_path, output);
    write_histograms_csv(csv_path, output);
    return {json_path, csv_path};
}

void run_analyze(const std::vector<std::filesystem::path>& histogram_files,
                 const AnalyzeOverrides& overrides, const std::filesystem::path& out_dir,
                 std::ostream& out) {
    if (histogram_files.empty())
        throw ConfigError("analyze requires at least one histogram file");

    std::vector<SimulationOutput> inputs;
    for (const auto& file : histogram_files) inputs.push_back(read_histograms_json(file));

    RunConfig config = config_from_echo(inputs.front().config_echo);
    if (overrides.config) {
        config.counts_per_joule = overrides.config->counts_per_joule;
        config.mixture_mode = overrides.config->mixture_mode;
        config.n_sigma = overrides.config->n_sigma;
        config.sigma_t_eff_s = overrides.config->sigma_t_eff_s;
        config.sigma_detuning_rad = overrides.config->sigma_detuning_rad;
        config.format = overrides.config->format;
    }
    if (config.counts_per_joule <= 0.0)
        throw ConfigError("analysis.counts_per_nanojoule must be positive for analyze");

    const PulseSpec pulse = resolved_pulse(config);
    const Duration t_eff = pulse.shape == PulseShape::Gaussian
                               ? effective_square_duration(pulse.shape_duration)
                               : pulse.shape_duration;

    MixtureOptions mixture;
    if (config.mixture_mode == "calibrated") {
        const auto [bright, dark] = calibration_means(config.readout, config.timing);
        mixture.bright_mean = bright;
        mixture.dark_mean = dark;
    }

    std::vector<RabiDataPoint> points;
    nlohmann::ordered_json per_energy = nlohmann::ordered_json::array();
    for (const auto& input : inputs) {
        for (const auto& point : input.points) {
            nlohmann::ordered_json entry;
            entry["energy_j"] = point.energy.joules();
            const double c_sc = config.counts_per_joule * point.energy.joules();
            entry["c_sc"] = c_sc;
            try {
                const MixtureFit fit = fit_histogram(point.histogram, mixture);
                double population = population_from_bright_weight(fit.bright_weight);
                const double std_error = 1.5 * fit.weight_std_error;
                bool clamped = false;
                if (population > 1.05) {
                    population = 1.05;
                    clamped = true;
                }
                entry["bright_weight"] = fit.bright_weight;
                entry["weight_std_error"] = fit.weight_std_error;
                entry["population"] = population;
                entry["population_std_error"] = std_error;
                entry["log_likelihood"] = fit.log_likelihood;
                if (clamped) entry["clamped"] = true;
                points.push_back({c_sc, population, std_error});
            } catch (const FitError& err) {
                entry["error"] = err.what();
            }
            per_energy.push_back(std::move(entry));
        }
    }

    std::filesystem::create_directories(out_dir);
    write_rabi_points_csv(out_dir / "rabi_points.csv", points);

    nlohmann::ordered_json report;
    report["config"] = config_echo(config);
    report["t_eff_s"] = t_eff.seconds();
    report["detuning_rad_per_s"] = pulse.detuning.radians_per_second();
    report["points"] = per_energy;

    std::string rabi_error;
    try {
        const RabiCurveModel model = fit_rabi_curve(points, t_eff, pulse.detuning);

        double c_max = 0.0;
        for (const auto& p : points) c_max = std::max(c_max, p.scatter_counts);
        std::vector<double> grid;
        const int grid_size = 200;
        for (int i = 0; i <= grid_size; ++i)
            grid.push_back(1.05 * c_max * i / static_cast<double>(grid_size));
        BandOptions band_options;
        band_options.sigma_t_eff = config.sigma_t_eff_s;
        band_options.sigma_detuning = config.sigma_detuning_rad;
        const auto band = confidence_band(model, grid, config.n_sigma, band_options);
        write_band_csv(out_dir / "rabi_band.csv", model, band);
        if (config.format == "json") {
            nlohmann::ordered_json curve;
            curve["points"] = nlohmann::ordered_json::array();
            for (const auto& p : points)
                curve["points"].push_back({{"c_sc", p.scatter_counts},
                                           {"population", p.excited_population},
                                           {"population_std_error", p.population_std_error}});
            curve["band"] = nlohmann::ordered_json::array();
            for (const auto& b : band)
                curve["band"].push_back({{"c_sc", b.scatter_counts},
                                         {"curve", model.predict(b.scatter_counts)},
                                         {"lower", b.lower},
                                         {"upper", b.upper}});
            std::ofstream curve_out(out_dir / "rabi_curve.json", std::ios::binary);
            if (!curve_out) throw IoError("cannot open for writing: rabi_curve.json");
            curve_out << curve.dump(2) << '\n';
        }

        auto& fit = report["rabi_fit"];
        fit["alpha_rad_per_s_per_sqrt_count"] = model.alpha;
        fit["alpha_std_error"] = std::sqrt(model.alpha_variance);
        fit["alpha_variance"] = model.alpha_variance;
        fit["converged"] = model.diagnostics.converged;
        fit["iterations"] = model.diagnostics.iterations;
        fit["residual_norm"] = model.diagnostics.residual_norm;
        fit["n_sigma"] = config.n_sigma;

        double peak = 0.0;
        for (const auto& g : grid) peak = std::max(peak, model.predict(g));
        fit["curve_peak"] = peak;

        out << "alpha = " << model.alpha << " +- " << std::sqrt(model.alpha_variance)
            << " rad/s per sqrt(count)\n"
            << "curve peak population = " << peak << "\n"
            << "points fitted = " << points.size() << "\n";
    } catch (const std::exception& err) {
        rabi_error = err.what();
        report["rabi_fit"] = {{"error", rabi_error}};
        out << "rabi fit failed: " << rabi_error << "\n";
    }

    {
        std::ofstream report_out(out_dir / "rabi_fit.json", std::ios::binary);
        if (!report_out) throw IoError("cannot open for writing: rabi_fit.json");
        report_out << report.dump(2) << '\n';
    }
    if (!rabi_error.empty()) throw FitError(rabi_error);
}

void run_spectrum(const RunConfig& config, std::ostream& out) {
    if (config.spectrum_file.empty())
        throw ConfigError("pulse.spectrum_file is required for the spectrum command");
    if (!config.reference_frequency_hz)
        throw ConfigError("pulse.reference_frequency is required for the spectrum command");

    const auto samples = load_spectrum_samples(config.spectrum_file);
    auto fit = fit_gaussian_spectrum(samples);
    fit.model.instrument_sigma_hz = config.instrument_sigma_hz;

    const AngularFrequency detuning =
        detuning_from_spectrum(fit.model, *config.reference_frequency_hz);
    const Duration duration = duration_from_spectrum(fit.model);
    const Duration t_eff = effective_square_duration(duration);
    const double sigma_true =
        std::sqrt(fit.model.sigma_hz * fit.model.sigma_hz -
                  fit.model.instrument_sigma_hz * fit.model.instrument_sigma_hz);

    out << "center_frequency_hz " << fit.model.center_frequency_hz << " +- "
        << fit.center_std_error << "\n"
        << "detuning_ghz " << hz_from_angular(detuning) / 1e9 << "\n"
        << "sigma_measured_ghz " << fit.model.sigma_hz / 1e9 << " +- "
        << fit.sigma_std_error / 1e9 << "\n"
        << "sigma_deconvolved_ghz " << sigma_true / 1e9 << "\n"
        << "field_duration_ps " << duration.seconds() * 1e12 << "\n"
        << "t_eff_ps " << t_eff.seconds() * 1e12 << "\n";
}

} // namespace ionpulse
