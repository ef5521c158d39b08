// Dimension-tagged physical scalars and the fixed atomic constants of the
// 171Yb+ 2S1/2 - 2P1/2 transition.
//
// The tags are deliberately lightweight: one validated double each, no
// general unit algebra. Frequencies and detunings are stored as angular
// frequencies (rad/s) everywhere inside the library; conversion from
// ordinary Hz happens exactly once at ingestion.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ionpulse/errors.hpp"

namespace ionpulse {

inline constexpr double two_pi = 6.283185307179586476925286766559;

class AngularFrequency {
public:
    AngularFrequency() = default;
    explicit AngularFrequency(double rad_per_s) : value_(rad_per_s) {
        if (!std::isfinite(rad_per_s))
            throw InvalidInput("AngularFrequency must be finite");
    }
    double radians_per_second() const { return value_; }

private:
    double value_ = 0.0;
};

class Duration {
public:
    Duration() = default;
    explicit Duration(double seconds) : value_(seconds) {
        if (!std::isfinite(seconds) || seconds < 0.0)
            throw InvalidInput("Duration must be finite and non-negative");
    }
    double seconds() const { return value_; }

private:
    double value_ = 0.0;
};

class Energy {
public:
    Energy() = default;
    explicit Energy(double joules) : value_(joules) {
        if (!std::isfinite(joules) || joules < 0.0)
            throw InvalidInput("Energy must be finite and non-negative");
    }
    double joules() const { return value_; }

private:
    double value_ = 0.0;
};

class Intensity {
public:
    Intensity() = default;
    explicit Intensity(double watts_per_m2) : value_(watts_per_m2) {
        if (!std::isfinite(watts_per_m2) || watts_per_m2 < 0.0)
            throw InvalidInput("Intensity must be finite and non-negative");
    }
    double watts_per_m2() const { return value_; }

private:
    double value_ = 0.0;
};

AngularFrequency angular_from_hz(double frequency_hz);
double hz_from_angular(AngularFrequency omega);

// One spontaneous-decay channel of the excited state. "bright" marks ground
// sublevels that scatter the readout light.
struct BranchingEntry {
    std::string label;
    double probability = 0.0;
    bool bright = false;
};

struct TransitionConstants {
    AngularFrequency gamma;         // natural linewidth, rad/s
    Intensity saturation_intensity; // W/m^2
    double clebsch_gordan = 0.0;
    Duration excited_lifetime;
    std::vector<BranchingEntry> branching;

    // Sum of the branching probabilities flagged bright.
    double bright_fraction() const;

    // Branching probabilities must sum to 1 within 1e-12 and the lifetime
    // must agree with 1/gamma within 1%. Throws InvalidInput otherwise.
    void validate() const;
};

// 171Yb+ 2S1/2 - 2P1/2 parameters: Gamma = 2pi x 19.6 MHz,
// I_s = 508 W/m^2, C = 1/sqrt(3), lifetime 8.12 ns, and the decay table
// F=1 m=-1 (bright), F=1 m=+1 (bright), F=0 (dark) at 1/3 each.
TransitionConstants yb171_defaults();

} // namespace ionpulse
