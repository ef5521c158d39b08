#include "ionpulse/quantities.hpp"

#include <cmath>
#include <numeric>

namespace ionpulse {

AngularFrequency angular_from_hz(double frequency_hz) {
    if (!std::isfinite(frequency_hz))
        throw InvalidInput("frequency must be finite");
    return AngularFrequency(two_pi * frequency_hz);
}

double hz_from_angular(AngularFrequency omega) {
    return omega.radians_per_second() / two_pi;
}

double TransitionConstants::bright_fraction() const {
    double sum = 0.0;
    for (const auto& entry : branching)
        if (entry.bright) sum += entry.probability;
    return sum;
}

void TransitionConstants::validate() const {
    double sum = 0.0;
    for (const auto& entry : branching) {
        if (entry.probability < 0.0 || entry.probability > 1.0)
            throw InvalidInput("branching probability out of [0,1]: " + entry.label);
        sum += entry.probability;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidInput("branching probabilities must sum to 1");
    if (gamma.radians_per_second() <= 0.0)
        throw InvalidInput("gamma must be positive");
    const double gamma_tau = gamma.radians_per_second() * excited_lifetime.seconds();
    if (std::abs(gamma_tau - 1.0) > 0.01)
        throw InvalidInput("excited_lifetime inconsistent with 1/gamma");
}

TransitionConstants yb171_defaults() {
    TransitionConstants c;
    c.gamma = angular_from_hz(19.6e6);
    c.saturation_intensity = Intensity(508.0);
    c.clebsch_gordan = 1.0 / std::sqrt(3.0);
    c.excited_lifetime = Duration(8.12e-9);
    c.branching = {
        {"F=1,m=-1", 1.0 / 3.0, true},
        {"F=1,m=+1", 1.0 / 3.0, true},
        {"F=0", 1.0 / 3.0, false},
    };
    c.validate();
    return c;
}

} // namespace ionpulse
