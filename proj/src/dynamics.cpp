#include "ionpulse/dynamics.hpp"

#include <cmath>

namespace ionpulse {

void DriveParameters::validate() const {
    if (rabi_frequency.radians_per_second() < 0.0)
        throw InvalidInput("rabi_frequency must be non-negative");
    if (duration.seconds() <= 0.0)
        throw InvalidInput("drive duration must be positive");
}

double excitation_probability_rect(const DriveParameters& drive) {
    const double omega = drive.rabi_frequency.radians_per_second();
    const double delta = drive.detuning.radians_per_second();
    const double t = drive.duration.seconds();
    const double w2 = omega * omega + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * t * std::sqrt(w2));
    return (omega * omega / w2) * s * s;
}

RectGradient excitation_probability_rect_gradient(const DriveParameters& drive) {
    const double omega = drive.rabi_frequency.radians_per_second();
    const double delta = drive.detuning.radians_per_second();
    const double t = drive.duration.seconds();
    RectGradient g;
    const double w2 = omega * omega + delta * delta;
    if (w2 == 0.0) return g;
    const double w = std::sqrt(w2);
    const double x = 0.5 * t * w;
    const double sin_x = std::sin(x);
    const double sin_2x = std::sin(2.0 * x);
    const double pre = omega * omega / w2;
    // d/dOmega: prefactor term + phase term with dx/dOmega = t Omega / (2 w)
    g.d_omega = 2.0 * omega * delta * delta / (w2 * w2) * sin_x * sin_x +
                pre * sin_2x * 0.5 * t * omega / w;
    g.d_detuning = -2.0 * omega * omega * delta / (w2 * w2) * sin_x * sin_x +
                   pre * sin_2x * 0.5 * t * delta / w;
    g.d_duration = pre * sin_2x * 0.5 * w;
    return g;
}

AngularFrequency theoretical_rabi(const TransitionConstants& constants,
                                  Intensity peak_intensity) {
    const double ratio =
        peak_intensity.watts_per_m2() / (2.0 * constants.saturation_intensity.watts_per_m2());
    return AngularFrequency(constants.clebsch_gordan * constants.gamma.radians_per_second() *
                            std::sqrt(ratio));
}

namespace {

struct State4 {
    // (Re cg, Im cg, Re ce, Im ce)
    double v[4];
};

// i dc/dt = H c with H = [[-d/2, om/2], [om/2, d/2]] gives
//   dcg/dt = -i(-d/2 cg + om/2 ce)
//   dce/dt = -i( om/2 cg + d/2 ce)
inline State4 derivative(const State4& s, double omega, double delta) {
    const double hd = 0.5 * delta;
    const double ho = 0.5 * omega;
    State4 d;
    // -i z = (Im z, -Re z)
    const double hg_re = -hd * s.v[0] + ho * s.v[2];
    const double hg_im = -hd * s.v[1] + ho * s.v[3];
    const double he_re = ho * s.v[0] + hd * s.v[2];
    const double he_im = ho * s.v[1] + hd * s.v[3];
    d.v[0] = hg_im;
    d.v[1] = -hg_re;
    d.v[2] = he_im;
    d.v[3] = -he_re;
    return d;
}

State4 rk4_run(const PulseEnvelope& envelope, double delta, State4 s, long steps) {
    const double h = (envelope.t_end - envelope.t_begin) / static_cast<double>(steps);
    double t = envelope.t_begin;
    for (long i = 0; i < steps; ++i) {
        const double om0 = envelope.rabi(t);
        const double om_half = envelope.rabi(t + 0.5 * h);
        const double om1 = envelope.rabi(t + h);
        const State4 k1 = derivative(s, om0, delta);
        State4 tmp;
        for (int j = 0; j < 4; ++j) tmp.v[j] = s.v[j] + 0.5 * h * k1.v[j];
        const State4 k2 = derivative(tmp, om_half, delta);
        for (int j = 0; j < 4; ++j) tmp.v[j] = s.v[j] + 0.5 * h * k2.v[j];
        const State4 k3 = derivative(tmp, om_half, delta);
        for (int j = 0; j < 4; ++j) tmp.v[j] = s.v[j] + h * k3.v[j];
        const State4 k4 = derivative(tmp, om1, delta);
        for (int j = 0; j < 4; ++j)
            s.v[j] += h / 6.0 * (k1.v[j] + 2.0 * k2.v[j] + 2.0 * k3.v[j] + k4.v[j]);
        t += h;
    }
    return s;
}

inline double norm_of(const State4& s) {
    return s.v[0] * s.v[0] + s.v[1] * s.v[1] + s.v[2] * s.v[2] + s.v[3] * s.v[3];
}

} // namespace

TwoLevelState integrate_schroedinger(const PulseEnvelope& envelope,
                                     AngularFrequency detuning,
                                     const TwoLevelState& initial,
                                     const StepControl& control) {
    if (!envelope.rabi)
        throw InvalidInput("envelope.rabi must be callable");
    if (!(envelope.t_end > envelope.t_begin))
        throw InvalidInput("envelope must have positive span");
    if (control.tolerance <= 0.0)
        throw InvalidInput("tolerance must be positive");

    const double delta = detuning.radians_per_second();
    State4 start{{initial.ground.real(), initial.ground.imag(),
                  initial.excited.real(), initial.excited.imag()}};
    const double norm0 = norm_of(start);

    long steps = control.initial_steps > 0 ? control.initial_steps : 1;
    State4 coarse = rk4_run(envelope, delta, start, steps);
    for (int refinement = 0; refinement < control.max_refinements; ++refinement) {
        steps *= 2;
        const State4 fine = rk4_run(envelope, delta, start, steps);
        const double pop_coarse = coarse.v[2] * coarse.v[2] + coarse.v[3] * coarse.v[3];
        const double pop_fine = fine.v[2] * fine.v[2] + fine.v[3] * fine.v[3];
        const double drift = std::abs(norm_of(fine) - norm0);
        if (std::abs(pop_fine - pop_coarse) < control.tolerance && drift < control.tolerance) {
            TwoLevelState out;
            out.ground = {fine.v[0], fine.v[1]};
            out.excited = {fine.v[2], fine.v[3]};
            return out;
        }
        coarse = fine;
    }
    throw NonConvergence("integrate_schroedinger: step halving exhausted before "
                         "reaching tolerance");
}

double bright_probability_after_decay(double p_excited,
                                      const TransitionConstants& constants) {
    if (!(p_excited >= 0.0 && p_excited <= 1.0))
        throw InvalidInput("p_excited must be in [0,1]");
    return p_excited * constants.bright_fraction();
}

} // namespace ionpulse
