// Two-level excitation dynamics in the rotating frame: the closed-form
// excitation probability for rectangular pulses, a Runge-Kutta integrator
// for arbitrary envelopes, and the theoretical Rabi frequency from beam
// parameters.
//
// Spontaneous emission is not part of the pulse-time dynamics: the ~2 ps
// pulses are ~3500x shorter than the 8.12 ns excited-state lifetime. Decay
// is applied discretely afterwards via bright_probability_after_decay.
#pragma once

#include <complex>
#include <functional>

#include "ionpulse/quantities.hpp"

namespace ionpulse {

struct TwoLevelState {
    std::complex<double> ground{1.0, 0.0};
    std::complex<double> excited{0.0, 0.0};

    double norm() const { return std::norm(ground) + std::norm(excited); }
    double excited_population() const { return std::norm(excited); }
};

struct DriveParameters {
    AngularFrequency rabi_frequency; // Omega_eff >= 0
    AngularFrequency detuning;       // Delta, signed
    Duration duration;               // t_eff > 0

    void validate() const;
};

// P_ex = Omega^2/(Omega^2 + Delta^2) * sin^2( t/2 * sqrt(Omega^2 + Delta^2) ),
// with P_ex = 0 at Omega = Delta = 0.
double excitation_probability_rect(const DriveParameters& drive);

// Analytic partial derivatives of excitation_probability_rect.
struct RectGradient {
    double d_omega = 0.0;    // dP/dOmega, s
    double d_detuning = 0.0; // dP/dDelta, s
    double d_duration = 0.0; // dP/dt, rad/s
};
RectGradient excitation_probability_rect_gradient(const DriveParameters& drive);

// Omega_th = C * Gamma * sqrt(I_p / (2 I_s)).
AngularFrequency theoretical_rabi(const TransitionConstants& constants,
                                  Intensity peak_intensity);

// Rabi-frequency envelope Omega(t) over [t_begin, t_end].
struct PulseEnvelope {
    std::function<double(double)> rabi;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct StepControl {
    // Bound on both the norm drift and the step-halving (Richardson)
    // difference of the final populations.
    double tolerance = 1e-10;
    int initial_steps = 128;
    int max_refinements = 20;
};

// Integrates i dc/dt = H(t) c with H = [[-Delta/2, Omega(t)/2],
// [Omega(t)/2, +Delta/2]] (rotating-wave approximation) using classic RK4,
// halving the step until both StepControl targets are met. Throws
// NonConvergence when max_refinements is exhausted.
TwoLevelState integrate_schroedinger(const PulseEnvelope& envelope,
                                     AngularFrequency detuning,
                                     const TwoLevelState& initial,
                                     const StepControl& control = {});

// Probability that the ion ends in a bright ground sublevel after the pulse:
// p_excited * (sum of bright branching probabilities); 2/3 for Yb171.
double bright_probability_after_decay(double p_excited,
                                      const TransitionConstants& constants);

} // namespace ionpulse
