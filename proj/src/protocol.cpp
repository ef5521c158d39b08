#include "ionpulse/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ionpulse {

void CycleTiming::validate() const {
    const double stages = cooling.seconds() + pumping.seconds() + decay_wait.seconds() +
                          readout.seconds();
    if (stages > cycle_period.seconds())
        throw InvalidInput("cycle stages exceed cycle_period");
    if (readout.seconds() <= 0.0)
        throw InvalidInput("readout duration must be positive");
}

CycleTiming default_cycle_timing() {
    CycleTiming t;
    t.cooling = Duration(40e-6);
    t.pumping = Duration(20e-6);
    t.decay_wait = Duration(2e-6);
    t.readout = Duration(227e-6);
    t.cycle_period = Duration(426.66e-6);
    t.validate();
    return t;
}

void ReadoutModel::validate() const {
    if (bright_rate < 0.0 || dark_rate < 0.0 || leak_rate < 0.0)
        throw InvalidInput("readout rates must be non-negative");
    if (preparation_error < 0.0 || preparation_error > 1.0)
        throw InvalidInput("preparation_error must be in [0,1]");
}

void CountHistogram::add(int count) {
    ++bins_[count];
    ++total_;
}

void CountHistogram::add_bin(int count, std::uint64_t occurrences) {
    if (occurrences == 0) return;
    bins_[count] += occurrences;
    total_ += occurrences;
}

void CountHistogram::merge(const CountHistogram& other) {
    for (const auto& [count, occurrences] : other.bins_)
        bins_[count] += occurrences;
    total_ += other.total_;
}

double CountHistogram::mean() const {
    if (total_ == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [count, occurrences] : bins_)
        sum += static_cast<double>(count) * static_cast<double>(occurrences);
    return sum / static_cast<double>(total_);
}

namespace {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed) : state_(seed) {}

RandomStream RandomStream::for_cycle(std::uint64_t seed, std::uint64_t point_index,
                                     std::uint64_t cycle_index) {
    std::uint64_t s = seed;
    s = mix64(s + 0x9e3779b97f4a7c15ULL * (point_index + 1));
    s = mix64(s + 0x9e3779b97f4a7c15ULL * (cycle_index + 1));
    return RandomStream(s);
}

std::uint64_t RandomStream::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RandomStream::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw InvalidInput("bernoulli probability must be in [0,1]");
    return uniform() < p;
}

std::size_t RandomStream::sample_index(std::span<const double> probabilities) {
    const double u = uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        cumulative += probabilities[i];
        if (u < cumulative) return i;
    }
    return probabilities.size() - 1; // rounding residue
}

int RandomStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw InvalidInput("poisson mean must be finite and non-negative");
    // Knuth multiplication, chunked so exp(-mean) stays representable.
    int total = 0;
    while (mean > 256.0) {
        const double chunk_l = std::exp(-256.0);
        double p = uniform();
        int k = 0;
        while (p > chunk_l) {
            ++k;
            p *= uniform();
        }
        total += k;
        mean -= 256.0;
    }
    const double l = std::exp(-mean);
    double p = uniform();
    int k = 0;
    while (p > l) {
        ++k;
        p *= uniform();
    }
    return total + k;
}

double RandomStream::exponential(double rate) {
    if (!(rate > 0.0))
        throw InvalidInput("exponential rate must be positive");
    return -std::log1p(-uniform()) / rate;
}

CycleRecord simulate_cycle(double p_excite, const TransitionConstants& constants,
                           const ReadoutModel& readout, const CycleTiming& timing,
                           RandomStream& rng) {
    if (!(p_excite >= 0.0 && p_excite <= 1.0))
        throw InvalidInput("p_excite must be in [0,1]");

    CycleRecord record;
    const double t_read = timing.readout.seconds();

    bool bright = false;
    if (readout.preparation_error > 0.0 && rng.bernoulli(readout.preparation_error)) {
        // Pumping failed: the ion is still in the bright manifold and the
        // pulse does not address it.
        bright = true;
    } else {
        record.excited = rng.bernoulli(p_excite);
        if (record.excited) {
            std::vector<double> probs(constants.branching.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                probs[i] = constants.branching[i].probability;
            const std::size_t channel = rng.sample_index(probs);
            record.decayed_bright = constants.branching[channel].bright;
            bright = record.decayed_bright;
        }
    }

    double mean_counts = readout.dark_rate * t_read;
    if (bright) {
        double t_bright = t_read;
        if (readout.leak_rate > 0.0)
            t_bright = std::min(t_read, rng.exponential(readout.leak_rate));
        mean_counts += readout.bright_rate * t_bright;
    }
    record.photon_count = rng.poisson(mean_counts);
    return record;
}

void ExperimentModel::validate() const {
    readout.validate();
    timing.validate();
    pulse.validate();
    if (rabi_source == RabiSource::AlphaCalibration) {
        if (alpha <= 0.0)
            throw ConfigError("alpha must be positive for alpha-calibrated runs");
        if (counts_per_joule <= 0.0)
            throw ConfigError("counts_per_joule must be positive for alpha-calibrated runs");
    }
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
}

AngularFrequency rabi_for_energy(const ExperimentModel& model, Energy energy) {
    if (model.rabi_source == RabiSource::AlphaCalibration) {
        const double c_sc = model.counts_per_joule * energy.joules();
        return AngularFrequency(model.alpha * std::sqrt(c_sc));
    }
    PulseSpec square = model.pulse;
    square.energy = energy;
    square.shape = PulseShape::Rectangular;
    if (model.pulse.shape == PulseShape::Gaussian)
        square.shape_duration = equivalent_square_width_for_intensity(model.pulse.shape_duration);
    return theoretical_rabi(model.constants, peak_intensity(square));
}

double excitation_probability_for_energy(const ExperimentModel& model, Energy energy) {
    const AngularFrequency omega = rabi_for_energy(model, energy);
    const Duration t_eff = model.pulse.shape == PulseShape::Gaussian
                               ? effective_square_duration(model.pulse.shape_duration)
                               : model.pulse.shape_duration;

    if (model.method == ExcitationMethod::ClosedForm || omega.radians_per_second() == 0.0)
        return excitation_probability_rect({omega, model.pulse.detuning, t_eff});

    PulseEnvelope envelope;
    if (model.pulse.shape == PulseShape::Gaussian) {
        const double d = model.pulse.shape_duration.seconds();
        const double peak = omega.radians_per_second();
        envelope.rabi = [peak, d](double t) { return peak * std::exp(-t * t / (2.0 * d * d)); };
        envelope.t_begin = -8.0 * d;
        envelope.t_end = 8.0 * d;
    } else {
        const double peak = omega.radians_per_second();
        envelope.rabi = [peak](double) { return peak; };
        envelope.t_begin = 0.0;
        envelope.t_end = t_eff.seconds();
    }
    return integrate_schroedinger(envelope, model.pulse.detuning, TwoLevelState{})
        .excited_population();
}

namespace {

CountHistogram simulate_range(double p_excite, const ExperimentModel& model,
                              std::uint64_t point_index, int first_cycle, int last_cycle,
                              std::uint64_t seed) {
    CountHistogram hist;
    for (int cycle = first_cycle; cycle < last_cycle; ++cycle) {
        RandomStream rng = RandomStream::for_cycle(seed, point_index,
                                                   static_cast<std::uint64_t>(cycle));
        hist.add(simulate_cycle(p_excite, model.constants, model.readout, model.timing, rng)
                     .photon_count);
    }
    return hist;
}

} // namespace

std::vector<EnergyHistogram> run_experiment(std::span<const Energy> pulse_energies,
                                            const ExperimentModel& model,
                                            int repetitions_per_point, std::uint64_t seed) {
    if (repetitions_per_point <= 0)
        throw ConfigError("repetitions_per_point must be positive");
    model.validate();

    std::vector<EnergyHistogram> results;
    results.reserve(pulse_energies.size());
    for (std::size_t point = 0; point < pulse_energies.size(); ++point) {
        const double p_excite = excitation_probability_for_energy(model, pulse_energies[point]);
        CountHistogram hist;
        if (model.workers <= 1) {
            hist = simulate_range(p_excite, model, point, 0, repetitions_per_point, seed);
        } else {
            const int workers = std::min(model.workers, repetitions_per_point);
            std::vector<CountHistogram> parts(workers);
            std::vector<std::thread> threads;
            threads.reserve(workers);
            for (int w = 0; w < workers; ++w) {
                const int first = static_cast<int>(static_cast<long>(repetitions_per_point) * w /
                                                   workers);
                const int last = static_cast<int>(static_cast<long>(repetitions_per_point) *
                                                  (w + 1) / workers);
                threads.emplace_back([&, w, first, last] {
                    parts[w] = simulate_range(p_excite, model, point, first, last, seed);
                });
            }
            for (auto& t : threads) t.join();
            for (const auto& part : parts) hist.merge(part);
        }
        results.push_back({pulse_energies[point], std::move(hist)});
    }
    return results;
}

} // namespace ionpulse
