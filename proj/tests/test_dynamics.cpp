#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ionpulse/dynamics.hpp"
#include "oracles.hpp"

using namespace ionpulse;

namespace {
DriveParameters drive(double omega, double delta, double t) {
    return {AngularFrequency(omega), AngularFrequency(delta), Duration(t)};
}
constexpr double pi = 3.14159265358979323846;
} // namespace

TEST_CASE("rectangular excitation probability: landmark values") {
    // resonant pi pulse
    const double t = 2.36e-12;
    CHECK(excitation_probability_rect(drive(pi / t, 0.0, t)) == doctest::Approx(1.0).epsilon(1e-12));
    // no drive
    CHECK(excitation_probability_rect(drive(0.0, two_pi * 33e9, t)) == 0.0);
    CHECK(excitation_probability_rect(drive(0.0, 0.0, t)) == 0.0);

    // fitted on-resonance curve at its measured peak; frozen from the
    // independent RK4 oracle below
    CHECK(excitation_probability_rect(drive(1.226e12, two_pi * 33e9, 2.36e-12)) ==
          doctest::Approx(0.96180091).epsilon(1e-6));
    // detuned curve maximum region
    CHECK(excitation_probability_rect(drive(1.226e12, two_pi * 190e9, 2.25e-12)) ==
          doctest::Approx(0.45151388).epsilon(1e-6));
}

TEST_CASE("rectangular probability properties") {
    const double omegas[] = {0.0, 1e10, 3.3e11, 1.226e12, 4e12};
    const double deltas[] = {0.0, 2.1e10, -2.0735e11, 1.19381e12};
    const double times[] = {1e-13, 0.941e-12, 2.36e-12, 7e-12};
    for (double om : omegas)
        for (double de : deltas)
            for (double t : times) {
                const double p = excitation_probability_rect(drive(om, de, t));
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                // detuning symmetry is exact
                CHECK(p == excitation_probability_rect(drive(om, -de, t)));
                // prefactor bound
                const double w2 = om * om + de * de;
                if (w2 > 0.0) CHECK(p <= om * om / w2 + 1e-15);
            }

    // resonant reduction to sin^2(Omega t / 2)
    for (double om : {1e10, 3.3e11, 1.226e12})
        for (double t : times) {
            const double expected = std::pow(std::sin(0.5 * om * t), 2);
            CHECK(excitation_probability_rect(drive(om, 0.0, t)) ==
                  doctest::Approx(expected).epsilon(1e-15));
        }
}

TEST_CASE("analytic gradient matches central differences") {
    for (double om : {2e11, 8e11, 1.5e12})
        for (double de : {0.0, 2.0735e11, -1.19e12}) {
            const double t = 2.36e-12;
            const auto grad = excitation_probability_rect_gradient(drive(om, de, t));
            const double h_om = om * 1e-6;
            const double fd_om = (excitation_probability_rect(drive(om + h_om, de, t)) -
                                  excitation_probability_rect(drive(om - h_om, de, t))) /
                                 (2.0 * h_om);
            CHECK(grad.d_omega == doctest::Approx(fd_om).epsilon(1e-6));

            const double h_t = t * 1e-6;
            const double fd_t = (excitation_probability_rect(drive(om, de, t + h_t)) -
                                 excitation_probability_rect(drive(om, de, t - h_t))) /
                                (2.0 * h_t);
            CHECK(grad.d_duration == doctest::Approx(fd_t).epsilon(1e-6));

            const double h_de = 1e5;
            const double fd_de = (excitation_probability_rect(drive(om, de + h_de, t)) -
                                  excitation_probability_rect(drive(om, de - h_de, t))) /
                                 (2.0 * h_de);
            CHECK(grad.d_detuning == doctest::Approx(fd_de).epsilon(1e-5));
        }
}

TEST_CASE("theoretical Rabi frequency") {
    const TransitionConstants yb = yb171_defaults();
    CHECK(theoretical_rabi(yb, Intensity(458e9)).radians_per_second() ==
          doctest::Approx(1.510e12).epsilon(1e-3));
    CHECK(theoretical_rabi(yb, Intensity(0.0)).radians_per_second() == 0.0);

    TransitionConstants unit = yb;
    unit.gamma = AngularFrequency(1.0);
    unit.clebsch_gordan = 1.0;
    unit.saturation_intensity = Intensity(1.0);
    CHECK(theoretical_rabi(unit, Intensity(2.0)).radians_per_second() ==
          doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("integrator matches the closed form on rectangular pulses") {
    int checked = 0;
    for (double om : {1e11, 3e11, 6e11, 1.0e12, 1.226e12})
        for (double de : {0.0, 2.1e10, 2.0735e11, -6e11, 1.19381e12})
            for (double t : {0.4e-12, 1.1e-12, 2.36e-12, 5e-12}) {
                PulseEnvelope envelope;
                envelope.rabi = [om](double) { return om; };
                envelope.t_begin = 0.0;
                envelope.t_end = t;
                const auto state = integrate_schroedinger(envelope, AngularFrequency(de),
                                                          TwoLevelState{}, {1e-11, 256, 20});
                const double closed = excitation_probability_rect(drive(om, de, t));
                CHECK(state.excited_population() == doctest::Approx(closed).epsilon(1e-8));
                CHECK(std::abs(state.norm() - 1.0) < 1e-10);
                ++checked;
            }
    CHECK(checked == 100);
}

TEST_CASE("integrator agrees with the independent oracle off the closed form's domain") {
    // Gaussian envelope, detuned: no closed form applies; compare against the
    // test-side fixed-step RK4.
    const double d = 0.941e-12;
    const double peak = 1.226e12;
    const double delta = two_pi * 33e9;
    PulseEnvelope envelope;
    envelope.rabi = [=](double t) { return peak * std::exp(-t * t / (2.0 * d * d)); };
    envelope.t_begin = -8.0 * d;
    envelope.t_end = 8.0 * d;
    const auto state =
        integrate_schroedinger(envelope, AngularFrequency(delta), TwoLevelState{}, {1e-11, 512, 20});
    const auto reference = oracle::rk4_two_level(
        [=](double t) { return peak * std::exp(-t * t / (2.0 * d * d)); }, delta, -8.0 * d,
        8.0 * d, 60000);
    CHECK(state.excited_population() ==
          doctest::Approx(reference.excited_population).epsilon(1e-8));
}

TEST_CASE("Gaussian pi-area pulse inverts on resonance") {
    // Peak Rabi frequency chosen so the equivalent square pulse
    // (t_eff = sqrt(2 pi) D = 2.36 ps) has area pi; on resonance the area
    // theorem makes the envelope shape irrelevant.
    const double d = 0.941e-12;
    const double t_eff = std::sqrt(two_pi) * d;
    const double peak = pi / t_eff;
    PulseEnvelope envelope;
    envelope.rabi = [=](double t) { return peak * std::exp(-t * t / (2.0 * d * d)); };
    envelope.t_begin = -8.0 * d;
    envelope.t_end = 8.0 * d;
    const auto state =
        integrate_schroedinger(envelope, AngularFrequency(0.0), TwoLevelState{}, {1e-11, 512, 20});
    CHECK(state.excited_population() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(state.excited_population() > 0.999); // exact inversion up to integration error
}

TEST_CASE("integrator norm conservation") {
    const double d = 0.941e-12;
    PulseEnvelope envelope;
    envelope.rabi = [=](double t) { return 1.4e12 * std::exp(-t * t / (2.0 * d * d)); };
    envelope.t_begin = -8.0 * d;
    envelope.t_end = 8.0 * d;
    const auto state = integrate_schroedinger(envelope, AngularFrequency(two_pi * 190e9),
                                              TwoLevelState{}, {1e-11, 512, 20});
    CHECK(std::abs(state.norm() - 1.0) < 1e-10);
}

TEST_CASE("integrator reports non-convergence") {
    PulseEnvelope envelope;
    envelope.rabi = [](double) { return 1e12; };
    envelope.t_begin = 0.0;
    envelope.t_end = 2e-12;
    // an unreachable tolerance with no refinement budget
    CHECK_THROWS_AS(integrate_schroedinger(envelope, AngularFrequency(0.0), TwoLevelState{},
                                           {1e-30, 2, 1}),
                    NonConvergence);
    CHECK_THROWS_AS(integrate_schroedinger(envelope, AngularFrequency(0.0), TwoLevelState{},
                                           {-1.0, 2, 1}),
                    InvalidInput);
}

TEST_CASE("bright probability after decay") {
    const TransitionConstants yb = yb171_defaults();
    CHECK(bright_probability_after_decay(1.0, yb) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(bright_probability_after_decay(0.0, yb) == 0.0);
    CHECK(bright_probability_after_decay(0.9, yb) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(bright_probability_after_decay(-0.1, yb), InvalidInput);
    CHECK_THROWS_AS(bright_probability_after_decay(1.1, yb), InvalidInput);
}
