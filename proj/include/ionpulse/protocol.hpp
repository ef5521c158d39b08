// Monte Carlo simulation of the four-step measurement cycle: cool, pump,
// excite with a single pulse, read out by state-selective fluorescence.
// Produces per-repetition photon counts with bright/dark Poisson statistics.
//
// Reproducibility contract: every cycle draws from its own random stream
// derived from (seed, point_index, cycle_index), so results are bit-identical
// for a given (config, seed) regardless of how cycles are distributed across
// workers. All samplers are implemented here rather than with <random>
// distributions, whose output is implementation-defined.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ionpulse/dynamics.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quantities.hpp"

namespace ionpulse {

struct CycleTiming {
    Duration cooling;
    Duration pumping;
    Duration decay_wait;
    Duration readout;
    Duration cycle_period;

    void validate() const; // stages must fit inside the period
};

// 40 us cooling, 20 us pumping, 2 us decay wait, 227 us readout,
// repeated every 426.66 us.
CycleTiming default_cycle_timing();

struct ReadoutModel {
    double bright_rate = 0.0;        // counts/s while the ion scatters
    double dark_rate = 0.0;          // background counts/s
    double leak_rate = 0.0;          // 1/s; bright ion depumps to dark during readout
    double preparation_error = 0.0;  // probability the ion starts bright regardless of the pulse

    void validate() const;
};

struct CycleRecord {
    bool excited = false;
    bool decayed_bright = false; // implies excited
    int photon_count = 0;
};

class CountHistogram {
public:
    void add(int count);
    void add_bin(int count, std::uint64_t occurrences);
    void merge(const CountHistogram& other);
    const std::map<int, std::uint64_t>& bins() const { return bins_; }
    std::uint64_t total() const { return total_; }
    double mean() const;

private:
    std::map<int, std::uint64_t> bins_;
    std::uint64_t total_ = 0;
};

// splitmix64-based stream; cheap to construct per cycle and stable across
// platforms and standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);
    static RandomStream for_cycle(std::uint64_t seed, std::uint64_t point_index,
                                  std::uint64_t cycle_index);

    std::uint64_t next_u64();
    double uniform(); // [0, 1)
    bool bernoulli(double p);
    // Index into a probability table (probabilities summing to ~1).
    std::size_t sample_index(std::span<const double> probabilities);
    int poisson(double mean);
    double exponential(double rate);

private:
    std::uint64_t state_;
};

// One repetition of the protocol. Draws excitation, the decay channel, and
// the readout photon count. A bright ion scatters at bright_rate until an
// exponential leak time (when leak_rate > 0) on top of the dark_rate
// background, which runs for the whole readout window.
CycleRecord simulate_cycle(double p_excite, const TransitionConstants& constants,
                           const ReadoutModel& readout, const CycleTiming& timing,
                           RandomStream& rng);

enum class ExcitationMethod { ClosedForm, Integrator };
enum class RabiSource { Theory, AlphaCalibration };

// Everything needed to turn a pulse energy into an excitation probability
// and simulate the readout.
struct ExperimentModel {
    TransitionConstants constants;
    PulseSpec pulse; // energy field ignored; energies supplied per point
    ExcitationMethod method = ExcitationMethod::ClosedForm;
    RabiSource rabi_source = RabiSource::Theory;
    double alpha = 0.0;            // rad/s per sqrt(count); RabiSource::AlphaCalibration
    double counts_per_joule = 0.0; // background scatter counts per joule of pulse energy
    ReadoutModel readout;
    CycleTiming timing = default_cycle_timing();
    int workers = 1;

    void validate() const;
};

// Effective Rabi frequency for a pulse energy: either Omega_th from the
// focal intensity, or alpha * sqrt(C_sc) with C_sc = counts_per_joule * E.
AngularFrequency rabi_for_energy(const ExperimentModel& model, Energy energy);

// Excitation probability for a pulse energy, by the closed form on the
// effective square pulse or by integrating the actual envelope.
double excitation_probability_for_energy(const ExperimentModel& model, Energy energy);

struct EnergyHistogram {
    Energy energy;
    CountHistogram histogram;
};

// Simulates repetitions_per_point cycles for each energy. Deterministic for
// a given seed, independent of model.workers.
std::vector<EnergyHistogram> run_experiment(std::span<const Energy> pulse_energies,
                                            const ExperimentModel& model,
                                            int repetitions_per_point,
                                            std::uint64_t seed);

} // namespace ionpulse
