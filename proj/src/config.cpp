#include "ionpulse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ionpulse/estimation.hpp"

namespace ionpulse {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::map<std::string, double, std::less<>> frequency_units = {
    {"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}, {"thz", 1e12}};
const std::map<std::string, double, std::less<>> time_units = {
    {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
const std::map<std::string, double, std::less<>> energy_units = {
    {"j", 1.0}, {"mj", 1e-3}, {"uj", 1e-6}, {"nj", 1e-9}, {"pj", 1e-12}, {"fj", 1e-15}};
const std::map<std::string, double, std::less<>> length_units = {
    {"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};

double parse_number(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + text + "'");
    }
    if (trim(text.substr(used)).empty()) return value;
    throw ConfigError(where + ": trailing text after number in '" + text + "'");
}

double parse_with_units(const std::string& text,
                        const std::map<std::string, double, std::less<>>& units,
                        const std::string& where) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + text + "'");
    }
    const std::string suffix = lower(trim(text.substr(used)));
    if (suffix.empty()) return value;
    const auto it = units.find(suffix);
    if (it == units.end())
        throw ConfigError(where + ": unknown unit '" + suffix + "' in '" + text + "'");
    return value * it->second;
}

long parse_integer(const std::string& text, const std::string& where) {
    const double v = parse_number(text, where);
    if (v != std::floor(v))
        throw ConfigError(where + ": expected an integer, got '" + text + "'");
    return static_cast<long>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, sep)) parts.push_back(trim(current));
    return parts;
}

struct Parser {
    RunConfig config;
    std::string source;
    bool saw_energy = false;

    void apply(const std::string& section, const std::string& key, const std::string& value,
               int line) {
        const std::string path = section + "." + key;
        const std::string where = source + ":" + std::to_string(line) + ": " + path;
        auto freq = [&] { return parse_with_units(value, frequency_units, where); };
        auto time = [&] { return parse_with_units(value, time_units, where); };
        auto length = [&] { return parse_with_units(value, length_units, where); };
        auto energy = [&] { return parse_with_units(value, energy_units, where); };
        auto number = [&] { return parse_number(value, where); };

        if (section == "constants") {
            if (key == "gamma")
                config.constants.gamma = angular_from_hz(freq());
            else if (key == "saturation_intensity")
                config.constants.saturation_intensity = Intensity(number());
            else if (key == "clebsch_gordan")
                config.constants.clebsch_gordan = number();
            else if (key == "excited_lifetime")
                config.constants.excited_lifetime = Duration(time());
            else
                throw ConfigError(where + ": unknown key");
        } else if (section == "pulse") {
            if (key == "shape") {
                const std::string v = lower(value);
                if (v == "gaussian")
                    config.shape = PulseShape::Gaussian;
                else if (v == "rectangular")
                    config.shape = PulseShape::Rectangular;
                else
                    throw ConfigError(where + ": shape must be gaussian or rectangular");
            } else if (key == "waist")
                config.waist_m = length();
            else if (key == "field_duration")
                config.field_duration = Duration(time());
            else if (key == "detuning")
                config.detuning = angular_from_hz(freq());
            else if (key == "spectrum_file")
                config.spectrum_file = value;
            else if (key == "reference_frequency")
                config.reference_frequency_hz = freq();
            else if (key == "instrument_resolution")
                config.instrument_sigma_hz = freq();
            else if (key == "energy") {
                require_single_energy_key(where);
                config.energies = {Energy(energy())};
            } else if (key == "energies") {
                require_single_energy_key(where);
                for (const auto& part : split(value, ','))
                    config.energies.emplace_back(
                        parse_with_units(part, energy_units, where));
            } else if (key == "energy_sweep") {
                require_single_energy_key(where);
                const auto parts = split(value, ':');
                if (parts.size() != 3)
                    throw ConfigError(where + ": expected 'start : stop : count'");
                const double start = parse_with_units(parts[0], energy_units, where);
                const double stop = parse_with_units(parts[1], energy_units, where);
                const long count = parse_integer(parts[2], where);
                if (count < 1) throw ConfigError(where + ": count must be >= 1");
                for (long i = 0; i < count; ++i) {
                    const double f = count == 1 ? 0.0
                                                : static_cast<double>(i) /
                                                      static_cast<double>(count - 1);
                    config.energies.emplace_back(start + f * (stop - start));
                }
            } else
                throw ConfigError(where + ": unknown key");
        } else if (section == "protocol") {
            if (key == "repetitions")
                config.repetitions = static_cast<int>(parse_integer(value, where));
            else if (key == "seed")
                config.seed = static_cast<std::uint64_t>(parse_integer(value, where));
            else if (key == "workers")
                config.workers = static_cast<int>(parse_integer(value, where));
            else if (key == "cooling")
                config.timing.cooling = Duration(time());
            else if (key == "pumping")
                config.timing.pumping = Duration(time());
            else if (key == "decay_wait")
                config.timing.decay_wait = Duration(time());
            else if (key == "readout")
                config.timing.readout = Duration(time());
            else if (key == "cycle_period")
                config.timing.cycle_period = Duration(time());
            else if (key == "excitation") {
                const std::string v = lower(value);
                if (v == "closed_form")
                    config.method = ExcitationMethod::ClosedForm;
                else if (v == "integrator")
                    config.method = ExcitationMethod::Integrator;
                else
                    throw ConfigError(where + ": excitation must be closed_form or integrator");
            } else if (key == "rabi_source") {
                const std::string v = lower(value);
                if (v == "theory")
                    config.rabi_source = RabiSource::Theory;
                else if (v == "alpha")
                    config.rabi_source = RabiSource::AlphaCalibration;
                else
                    throw ConfigError(where + ": rabi_source must be theory or alpha");
            } else if (key == "alpha")
                config.alpha = number();
            else
                throw ConfigError(where + ": unknown key");
        } else if (section == "readout") {
            if (key == "bright_rate")
                config.readout.bright_rate = number();
            else if (key == "dark_rate")
                config.readout.dark_rate = number();
            else if (key == "leak_rate")
                config.readout.leak_rate = number();
            else if (key == "preparation_error")
                config.readout.preparation_error = number();
            else
                throw ConfigError(where + ": unknown key");
        } else if (section == "analysis") {
            if (key == "counts_per_nanojoule")
                config.counts_per_joule = number() * 1e9;
            else if (key == "mixture") {
                const std::string v = lower(value);
                if (v != "calibrated" && v != "cofit")
                    throw ConfigError(where + ": mixture must be calibrated or cofit");
                config.mixture_mode = v;
            } else if (key == "n_sigma")
                config.n_sigma = number();
            else if (key == "t_eff_uncertainty")
                config.sigma_t_eff_s = time();
            else if (key == "detuning_uncertainty")
                config.sigma_detuning_rad = two_pi * freq();
            else
                throw ConfigError(where + ": unknown key");
        } else if (section == "output") {
            if (key == "directory")
                config.out_dir = value;
            else if (key == "format") {
                const std::string v = lower(value);
                if (v != "csv" && v != "json")
                    throw ConfigError(where + ": format must be csv or json");
                config.format = v;
            } else
                throw ConfigError(where + ": unknown key");
        } else {
            throw ConfigError(where + ": unknown section [" + section + "]");
        }
    }

    void require_single_energy_key(const std::string& where) {
        if (saw_energy)
            throw ConfigError(where + ": energy, energies and energy_sweep are exclusive");
        saw_energy = true;
    }
};

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source_name) {
    Parser parser;
    parser.source = source_name;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source_name + ":" + std::to_string(line_number) +
                                  ": malformed section header '" + line + "'");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(line_number) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError(source_name + ":" + std::to_string(line_number) +
                              ": key '" + key + "' outside any [section]");
        if (key.empty() || value.empty())
            throw ConfigError(source_name + ":" + std::to_string(line_number) +
                              ": empty key or value");
        parser.apply(section, key, value, line_number);
    }

    parser.config.constants.validate();
    parser.config.readout.validate();
    parser.config.timing.validate();
    if (parser.config.repetitions <= 0)
        throw ConfigError(source_name + ": protocol.repetitions must be positive");
    if (parser.config.workers < 1)
        throw ConfigError(source_name + ": protocol.workers must be >= 1");
    return parser.config;
}

RunConfig load_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config file: " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), file.string());
}

RunConfig resolve_config(RunConfig config) {
    if (!config.spectrum_file.empty()) {
        if (config.detuning)
            throw ConfigError("pulse.detuning and pulse.spectrum_file are exclusive");
        if (!config.reference_frequency_hz)
            throw ConfigError("pulse.reference_frequency is required with pulse.spectrum_file");
        const auto samples = load_spectrum_samples(config.spectrum_file);
        auto fit = fit_gaussian_spectrum(samples);
        fit.model.instrument_sigma_hz = config.instrument_sigma_hz;
        config.detuning = detuning_from_spectrum(fit.model, *config.reference_frequency_hz);
        config.field_duration = duration_from_spectrum(fit.model);
    }
    return config;
}

PulseSpec resolved_pulse(const RunConfig& config) {
    if (!config.detuning)
        throw ConfigError("pulse.detuning (or pulse.spectrum_file) is required");
    PulseSpec pulse;
    pulse.shape = config.shape;
    pulse.waist_m = config.waist_m;
    pulse.shape_duration = config.field_duration;
    pulse.detuning = *config.detuning;
    pulse.validate();
    return pulse;
}

ExperimentModel experiment_model(const RunConfig& config) {
    ExperimentModel model;
    model.constants = config.constants;
    model.pulse = resolved_pulse(config);
    model.method = config.method;
    model.rabi_source = config.rabi_source;
    model.alpha = config.alpha;
    model.counts_per_joule = config.counts_per_joule;
    model.readout = config.readout;
    model.timing = config.timing;
    model.workers = config.workers;
    model.validate();
    return model;
}

nlohmann::ordered_json config_echo(const RunConfig& config) {
    nlohmann::ordered_json echo;
    auto& constants = echo["constants"];
    constants["gamma_rad_per_s"] = config.constants.gamma.radians_per_second();
    constants["saturation_intensity_w_per_m2"] =
        config.constants.saturation_intensity.watts_per_m2();
    constants["clebsch_gordan"] = config.constants.clebsch_gordan;
    constants["excited_lifetime_s"] = config.constants.excited_lifetime.seconds();
    constants["branching"] = nlohmann::ordered_json::array();
    for (const auto& b : config.constants.branching)
        constants["branching"].push_back(
            {{"label", b.label}, {"probability", b.probability}, {"bright", b.bright}});

    auto& pulse = echo["pulse"];
    pulse["shape"] = config.shape == PulseShape::Gaussian ? "gaussian" : "rectangular";
    pulse["waist_m"] = config.waist_m;
    pulse["field_duration_s"] = config.field_duration.seconds();
    if (config.detuning)
        pulse["detuning_rad_per_s"] = config.detuning->radians_per_second();
    if (!config.spectrum_file.empty()) pulse["spectrum_file"] = config.spectrum_file;
    if (config.reference_frequency_hz)
        pulse["reference_frequency_hz"] = *config.reference_frequency_hz;
    pulse["instrument_sigma_hz"] = config.instrument_sigma_hz;
    pulse["energies_j"] = nlohmann::ordered_json::array();
    for (const auto& e : config.energies) pulse["energies_j"].push_back(e.joules());

    auto& protocol = echo["protocol"];
    protocol["repetitions"] = config.repetitions;
    protocol["seed"] = config.seed;
    protocol["workers"] = config.workers;
    protocol["cooling_s"] = config.timing.cooling.seconds();
    protocol["pumping_s"] = config.timing.pumping.seconds();
    protocol["decay_wait_s"] = config.timing.decay_wait.seconds();
    protocol["readout_s"] = config.timing.readout.seconds();
    protocol["cycle_period_s"] = config.timing.cycle_period.seconds();
    protocol["excitation"] =
        config.method == ExcitationMethod::ClosedForm ? "closed_form" : "integrator";
    protocol["rabi_source"] =
        config.rabi_source == RabiSource::Theory ? "theory" : "alpha";
    protocol["alpha"] = config.alpha;

    auto& readout = echo["readout"];
    readout["bright_rate"] = config.readout.bright_rate;
    readout["dark_rate"] = config.readout.dark_rate;
    readout["leak_rate"] = config.readout.leak_rate;
    readout["preparation_error"] = config.readout.preparation_error;

    auto& analysis = echo["analysis"];
    analysis["counts_per_joule"] = config.counts_per_joule;
    analysis["mixture"] = config.mixture_mode;
    analysis["n_sigma"] = config.n_sigma;
    analysis["sigma_t_eff_s"] = config.sigma_t_eff_s;
    analysis["sigma_detuning_rad_per_s"] = config.sigma_detuning_rad;
    return echo;
}

RunConfig config_from_echo(const nlohmann::ordered_json& echo) {
    RunConfig config;
    try {
        const auto& constants = echo.at("constants");
        config.constants.gamma =
            AngularFrequency(constants.at("gamma_rad_per_s").get<double>());
        config.constants.saturation_intensity =
            Intensity(constants.at("saturation_intensity_w_per_m2").get<double>());
        config.constants.clebsch_gordan = constants.at("clebsch_gordan").get<double>();
        config.constants.excited_lifetime =
            Duration(constants.at("excited_lifetime_s").get<double>());
        config.constants.branching.clear();
        for (const auto& b : constants.at("branching"))
            config.constants.branching.push_back({b.at("label").get<std::string>(),
                                                  b.at("probability").get<double>(),
                                                  b.at("bright").get<bool>()});

        const auto& pulse = echo.at("pulse");
        config.shape = pulse.at("shape").get<std::string>() == "gaussian"
                           ? PulseShape::Gaussian
                           : PulseShape::Rectangular;
        config.waist_m = pulse.at("waist_m").get<double>();
        config.field_duration = Duration(pulse.at("field_duration_s").get<double>());
        if (pulse.contains("detuning_rad_per_s"))
            config.detuning = AngularFrequency(pulse.at("detuning_rad_per_s").get<double>());
        if (pulse.contains("reference_frequency_hz"))
            config.reference_frequency_hz = pulse.at("reference_frequency_hz").get<double>();
        config.instrument_sigma_hz = pulse.at("instrument_sigma_hz").get<double>();
        config.energies.clear();
        for (const auto& e : pulse.at("energies_j"))
            config.energies.emplace_back(e.get<double>());

        const auto& protocol = echo.at("protocol");
        config.repetitions = protocol.at("repetitions").get<int>();
        config.seed = protocol.at("seed").get<std::uint64_t>();
        config.workers = protocol.at("workers").get<int>();
        config.timing.cooling = Duration(protocol.at("cooling_s").get<double>());
        config.timing.pumping = Duration(protocol.at("pumping_s").get<double>());
        config.timing.decay_wait = Duration(protocol.at("decay_wait_s").get<double>());
        config.timing.readout = Duration(protocol.at("readout_s").get<double>());
        config.timing.cycle_period = Duration(protocol.at("cycle_period_s").get<double>());
        config.method = protocol.at("excitation").get<std::string>() == "integrator"
                            ? ExcitationMethod::Integrator
                            : ExcitationMethod::ClosedForm;
        config.rabi_source = protocol.at("rabi_source").get<std::string>() == "alpha"
                                 ? RabiSource::AlphaCalibration
                                 : RabiSource::Theory;
        config.alpha = protocol.at("alpha").get<double>();

        const auto& readout = echo.at("readout");
        config.readout.bright_rate = readout.at("bright_rate").get<double>();
        config.readout.dark_rate = readout.at("dark_rate").get<double>();
        config.readout.leak_rate = readout.at("leak_rate").get<double>();
        config.readout.preparation_error = readout.at("preparation_error").get<double>();

        const auto& analysis = echo.at("analysis");
        config.counts_per_joule = analysis.at("counts_per_joule").get<double>();
        config.mixture_mode = analysis.at("mixture").get<std::string>();
        config.n_sigma = analysis.at("n_sigma").get<double>();
        config.sigma_t_eff_s = analysis.at("sigma_t_eff_s").get<double>();
        config.sigma_detuning_rad = analysis.at("sigma_detuning_rad_per_s").get<double>();
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("malformed config echo: ") + err.what());
    }
    return config;
}

} // namespace ionpulse
