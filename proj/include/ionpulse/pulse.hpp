// Pulse envelope models, time-frequency relations for transform-limited
// Gaussian pulses, effective-square-pulse conversions, and focal intensity.
//
// Gaussian duration convention
// ----------------------------
// For shape = Gaussian, shape_duration holds the 1/e^2 field duration
// figure D reported by the spectral analysis. The field envelope is
//
//     e(t) = exp(-t^2 / (2 D^2)),
//
// i.e. D is the Gaussian sigma of the field (equivalently the 1/e
// half-width of the intensity envelope). Under this convention
//   - integral of the field      = sqrt(2 pi) * D  -> effective_square_duration
//   - integral of the intensity  = sqrt(pi)   * D  -> equivalent_square_width_for_intensity
//   - intensity-spectrum sigma   = 1 / (2 sqrt(2) pi D)
// and the DFT of a sampled field envelope round-trips through
// duration_from_spectrum.
#pragma once

#include <filesystem>
#include <vector>

#include "ionpulse/quantities.hpp"

namespace ionpulse {

enum class PulseShape { Rectangular, Gaussian };

struct PulseSpec {
    PulseShape shape = PulseShape::Gaussian;
    Energy energy;
    Duration shape_duration; // Rectangular: full width; Gaussian: D above
    AngularFrequency detuning;
    double waist_m = 0.0;

    void validate() const;
};

// Gaussian model of a measured intensity spectrum. sigma is the standard
// deviation of the intensity spectrum; instrument_sigma the standard
// deviation of the (Gaussian) spectrometer response.
struct SpectrumModel {
    double center_frequency_hz = 0.0;
    double sigma_hz = 0.0;
    double amplitude = 0.0;
    double instrument_sigma_hz = 0.0;
};

// Peak intensity of a square pulse focused to waist w0:
// I_p = 2 E / (pi w0^2 t_p). Requires shape == Rectangular; Gaussian pulses
// are first converted via equivalent_square_width_for_intensity.
Intensity peak_intensity(const PulseSpec& spec);

// Square-pulse width with the same field area as the Gaussian at equal peak
// Rabi frequency: D -> sqrt(2 pi) D.
Duration effective_square_duration(Duration gaussian_field_e2_duration);

// Square-pulse width with the same energy as the Gaussian at equal peak
// intensity: D -> sqrt(pi) D.
Duration equivalent_square_width_for_intensity(Duration gaussian_field_e2_duration);

// Transform-limited Gaussian duration from a measured intensity spectrum.
// Deconvolves the instrument response in quadrature
// (sigma_true^2 = sigma^2 - instrument_sigma^2), then inverts
// sigma_true = 1 / (2 sqrt(2) pi D). Throws InvalidInput when
// sigma <= instrument_sigma.
Duration duration_from_spectrum(const SpectrumModel& spectrum);

// Signed detuning 2 pi (center - reference).
AngularFrequency detuning_from_spectrum(const SpectrumModel& spectrum,
                                        double reference_frequency_hz);

// Pulse area Theta = Omega_eff * t_eff.
double pulse_area(AngularFrequency omega_eff, Duration t_eff);

struct SpectrumSample {
    double frequency_hz = 0.0;
    double amplitude = 0.0;
};

// Two-column numeric text (frequency_Hz amplitude), '#' starts a comment.
// Throws IoError naming the offending line on malformed input.
std::vector<SpectrumSample> load_spectrum_samples(const std::filesystem::path& file);
std::vector<SpectrumSample> parse_spectrum_samples(std::istream& in,
                                                   const std::string& source_name);

} // namespace ionpulse
