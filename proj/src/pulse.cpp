#include "ionpulse/pulse.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace ionpulse {

namespace {
constexpr double pi = 3.14159265358979323846;
const double sqrt_two_pi = std::sqrt(two_pi);
const double sqrt_pi = std::sqrt(pi);
} // namespace

void PulseSpec::validate() const {
    if (shape_duration.seconds() <= 0.0)
        throw InvalidInput("pulse shape_duration must be positive");
    if (waist_m <= 0.0 || !std::isfinite(waist_m))
        throw InvalidInput("pulse waist must be positive");
}

Intensity peak_intensity(const PulseSpec& spec) {
    if (spec.shape != PulseShape::Rectangular)
        throw InvalidInput("peak_intensity expects a rectangular pulse; "
                           "convert Gaussian widths with equivalent_square_width_for_intensity");
    spec.validate();
    const double tp = spec.shape_duration.seconds();
    const double w0 = spec.waist_m;
    return Intensity(2.0 * spec.energy.joules() / (pi * w0 * w0 * tp));
}

Duration effective_square_duration(Duration gaussian_field_e2_duration) {
    if (gaussian_field_e2_duration.seconds() <= 0.0)
        throw InvalidInput("duration must be positive");
    return Duration(sqrt_two_pi * gaussian_field_e2_duration.seconds());
}

Duration equivalent_square_width_for_intensity(Duration gaussian_field_e2_duration) {
    if (gaussian_field_e2_duration.seconds() <= 0.0)
        throw InvalidInput("duration must be positive");
    return Duration(sqrt_pi * gaussian_field_e2_duration.seconds());
}

Duration duration_from_spectrum(const SpectrumModel& spectrum) {
    const double sigma = spectrum.sigma_hz;
    const double instr = spectrum.instrument_sigma_hz;
    if (sigma <= 0.0)
        throw InvalidInput("spectrum sigma must be positive");
    if (instr < 0.0)
        throw InvalidInput("instrument sigma must be non-negative");
    if (sigma <= instr)
        throw InvalidInput("cannot deconvolve: spectrum sigma <= instrument sigma");
    const double sigma_true = std::sqrt(sigma * sigma - instr * instr);
    return Duration(1.0 / (2.0 * std::sqrt(2.0) * pi * sigma_true));
}

AngularFrequency detuning_from_spectrum(const SpectrumModel& spectrum,
                                        double reference_frequency_hz) {
    return angular_from_hz(spectrum.center_frequency_hz - reference_frequency_hz);
}

double pulse_area(AngularFrequency omega_eff, Duration t_eff) {
    return omega_eff.radians_per_second() * t_eff.seconds();
}

std::vector<SpectrumSample> parse_spectrum_samples(std::istream& in,
                                                   const std::string& source_name) {
    std::vector<SpectrumSample> samples;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream fields(line);
        double freq = 0.0, amp = 0.0;
        if (!(fields >> freq)) {
            std::string leftover;
            std::istringstream(line) >> leftover;
            throw IoError(source_name + ":" + std::to_string(line_number) +
                          ": expected numeric frequency, got '" + leftover + "'");
        }
        if (!(fields >> amp))
            throw IoError(source_name + ":" + std::to_string(line_number) +
                          ": expected two columns (frequency amplitude)");
        std::string extra;
        if (fields >> extra)
            throw IoError(source_name + ":" + std::to_string(line_number) +
                          ": unexpected trailing field '" + extra + "'");
        samples.push_back({freq, amp});
    }
    return samples;
}

std::vector<SpectrumSample> load_spectrum_samples(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot open spectrum file: " + file.string());
    return parse_spectrum_samples(in, file.string());
}

} // namespace ionpulse
