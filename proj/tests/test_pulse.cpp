#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ionpulse/estimation.hpp"
#include "ionpulse/pulse.hpp"
#include "oracles.hpp"

using namespace ionpulse;

namespace {
PulseSpec square_pulse(double energy_j, double waist_m, double width_s) {
    PulseSpec spec;
    spec.shape = PulseShape::Rectangular;
    spec.energy = Energy(energy_j);
    spec.shape_duration = Duration(width_s);
    spec.waist_m = waist_m;
    return spec;
}
} // namespace

TEST_CASE("peak intensity of the measured pulse") {
    // E = 0.0867 nJ, w0 = 8.5 um, t_p = sqrt(pi) x 0.941 ps
    const auto spec = square_pulse(0.0867e-9, 8.5e-6, 1.667e-12);
    CHECK(peak_intensity(spec).watts_per_m2() == doctest::Approx(4.58e11).epsilon(0.002));

    CHECK(peak_intensity(square_pulse(0.0, 8.5e-6, 1.667e-12)).watts_per_m2() == 0.0);

    // exactly inverse-quadratic in waist, linear in energy
    const double base = peak_intensity(spec).watts_per_m2();
    CHECK(peak_intensity(square_pulse(0.0867e-9, 2 * 8.5e-6, 1.667e-12)).watts_per_m2() ==
          doctest::Approx(base / 4.0).epsilon(1e-15));
    CHECK(peak_intensity(square_pulse(3 * 0.0867e-9, 8.5e-6, 1.667e-12)).watts_per_m2() ==
          doctest::Approx(3.0 * base).epsilon(1e-15));
}

TEST_CASE("peak intensity rejects bad input") {
    PulseSpec spec = square_pulse(1e-9, 8.5e-6, 1e-12);
    spec.shape = PulseShape::Gaussian;
    CHECK_THROWS_AS(peak_intensity(spec), InvalidInput);
    CHECK_THROWS_AS(peak_intensity(square_pulse(1e-9, 0.0, 1e-12)), InvalidInput);
    CHECK_THROWS_AS(peak_intensity(square_pulse(1e-9, 8.5e-6, 0.0)), InvalidInput);
}

TEST_CASE("effective square durations") {
    CHECK(effective_square_duration(Duration(0.941e-12)).seconds() ==
          doctest::Approx(2.359e-12).epsilon(2e-4));
    CHECK(effective_square_duration(Duration(0.896e-12)).seconds() ==
          doctest::Approx(2.246e-12).epsilon(2e-4));
    CHECK(effective_square_duration(Duration(1.0)).seconds() ==
          doctest::Approx(2.5066282746).epsilon(1e-10));

    CHECK(equivalent_square_width_for_intensity(Duration(0.941e-12)).seconds() ==
          doctest::Approx(1.668e-12).epsilon(2e-4));
    CHECK(equivalent_square_width_for_intensity(Duration(1.0)).seconds() ==
          doctest::Approx(1.7724538509).epsilon(1e-10));
    CHECK(equivalent_square_width_for_intensity(Duration(2.0)).seconds() ==
          doctest::Approx(3.5449077018).epsilon(1e-10));

    // ratio of the two scalings is sqrt(2) for any input
    for (double d : {1e-13, 0.941e-12, 3.3e-12, 1.0}) {
        const double ratio = effective_square_duration(Duration(d)).seconds() /
                             equivalent_square_width_for_intensity(Duration(d)).seconds();
        CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    }

    CHECK_THROWS_AS(effective_square_duration(Duration(0.0)), InvalidInput);
    CHECK_THROWS_AS(equivalent_square_width_for_intensity(Duration(0.0)), InvalidInput);
}

TEST_CASE("detuning from spectrum") {
    SpectrumModel model;
    model.center_frequency_hz = 8.112e14;
    CHECK(detuning_from_spectrum(model, 8.112e14).radians_per_second() == 0.0);

    model.center_frequency_hz = 8.112e14 - 33e9;
    CHECK(detuning_from_spectrum(model, 8.112e14).radians_per_second() ==
          doctest::Approx(-2.0735e11).epsilon(1e-4));

    model.center_frequency_hz = 8.112e14 - 190e9;
    CHECK(detuning_from_spectrum(model, 8.112e14).radians_per_second() ==
          doctest::Approx(-1.1938e12).epsilon(1e-4));
}

TEST_CASE("pulse area") {
    CHECK(pulse_area(AngularFrequency(0.0), Duration(2.36e-12)) == 0.0);
    CHECK(pulse_area(AngularFrequency(1.331e12), Duration(2.36e-12)) ==
          doctest::Approx(3.141).epsilon(1e-3));
    CHECK(pulse_area(AngularFrequency(1.226e12), Duration(2.36e-12)) ==
          doctest::Approx(2.893).epsilon(1e-3));
}

TEST_CASE("duration from spectrum rejects degenerate deconvolution") {
    SpectrumModel model;
    model.sigma_hz = 3.6e9;
    model.instrument_sigma_hz = 3.6e9;
    CHECK_THROWS_AS(duration_from_spectrum(model), InvalidInput);
    model.sigma_hz = 0.0;
    model.instrument_sigma_hz = 0.0;
    CHECK_THROWS_AS(duration_from_spectrum(model), InvalidInput);
}

TEST_CASE("duration from spectrum: DFT round trip") {
    // Sample the field of a 0.941 ps pulse, DFT it, fit the intensity
    // spectrum, and invert back to a duration.
    for (double d : {0.941e-12, 2.0 * 0.941e-12, 0.896e-12}) {
        const auto samples =
            oracle::gaussian_field_intensity_spectrum(d, 8.112e14, 4096, 241, 5e11 * 0.941e-12 / d);
        const auto fit = fit_gaussian_spectrum(samples);
        const Duration recovered = duration_from_spectrum(fit.model);
        CHECK(recovered.seconds() == doctest::Approx(d).epsilon(1e-4));
    }

    // Fourier scaling: doubling the duration halves the spectral width,
    // doubling the recovered duration.
    const auto narrow = oracle::gaussian_field_intensity_spectrum(0.941e-12, 0.0, 4096, 241, 5e11);
    const auto wide =
        oracle::gaussian_field_intensity_spectrum(2 * 0.941e-12, 0.0, 4096, 241, 2.5e11);
    const double d1 = duration_from_spectrum(fit_gaussian_spectrum(narrow).model).seconds();
    const double d2 = duration_from_spectrum(fit_gaussian_spectrum(wide).model).seconds();
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("instrument deconvolution in quadrature") {
    // spectrum broadened by a 3.6 GHz instrument response
    const double d_true = 0.941e-12;
    const double sigma_true = 1.0 / (2.0 * std::sqrt(2.0) * 3.14159265358979 * d_true);
    SpectrumModel model;
    model.sigma_hz = std::sqrt(sigma_true * sigma_true + 3.6e9 * 3.6e9);
    model.instrument_sigma_hz = 3.6e9;
    CHECK(duration_from_spectrum(model).seconds() == doctest::Approx(d_true).epsilon(1e-12));
}

TEST_CASE("spectrum file parsing") {
    std::istringstream good("# comment line\n"
                            "8.111e14 0.1\n"
                            "8.112e14 0.9  # trailing comment\n"
                            "\n"
                            "8.113e14 0.2\n");
    const auto samples = parse_spectrum_samples(good, "good.txt");
    REQUIRE(samples.size() == 3);
    CHECK(samples[1].frequency_hz == doctest::Approx(8.112e14));
    CHECK(samples[1].amplitude == doctest::Approx(0.9));

    std::istringstream garbage("8.111e14 0.1\nnot a number here\n");
    CHECK_THROWS_WITH_AS(parse_spectrum_samples(garbage, "bad.txt"),
                         doctest::Contains("bad.txt:2"), IoError);

    std::istringstream one_column("8.111e14\n");
    CHECK_THROWS_AS(parse_spectrum_samples(one_column, "one.txt"), IoError);

    std::istringstream three_columns("8.111e14 0.1 7\n");
    CHECK_THROWS_AS(parse_spectrum_samples(three_columns, "three.txt"), IoError);
}
