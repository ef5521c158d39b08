// Statistical recovery of populations and physical parameters: photon-count
// mixture fitting, single-parameter Rabi-curve fitting with confidence
// bands, and Gaussian spectral fitting. The nonlinear fits share one small
// damped-least-squares core.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ionpulse/dynamics.hpp"
#include "ionpulse/protocol.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quantities.hpp"

namespace ionpulse {

// ---------------------------------------------------------------------------
// Shared fitting machinery
// ---------------------------------------------------------------------------

struct FitResult {
    std::vector<std::string> parameter_names;
    std::vector<double> parameters;
    // (J^T J)^-1 at the solution; for residuals pre-scaled by 1/sigma this is
    // the parameter covariance.
    std::vector<std::vector<double>> covariance;
    double residual_norm = 0.0; // sqrt(sum of squared residuals)
    bool converged = false;
    int iterations = 0;
};

struct LevMarOptions {
    int max_iterations = 200;
    double parameter_tolerance = 1e-10; // relative step size for convergence
    double initial_damping = 1e-3;
    double damping_increase = 10.0; // on rejected step
    double damping_decrease = 0.1;  // on accepted step
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;
using JacobianFn =
    std::function<std::vector<std::vector<double>>(const std::vector<double>&)>;

// Damped least squares on a small dense problem. Throws FitError with
// diagnostics when max_iterations is exhausted without meeting
// parameter_tolerance.
FitResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                              std::vector<double> initial,
                              std::vector<std::string> parameter_names,
                              const LevMarOptions& options = {});

// Central-difference Jacobian of a residual map; rows follow residuals,
// columns follow parameters.
std::vector<std::vector<double>> finite_difference_jacobian(const ResidualFn& residuals,
                                                            const std::vector<double>& at,
                                                            double step);

// ---------------------------------------------------------------------------
// Photon-count mixture fitting
// ---------------------------------------------------------------------------

struct PoissonPmf {
    double mean = 0.0;
    double log_pmf(int k) const;
    double pmf(int k) const;
};

struct MixtureFit {
    double bright_weight = 0.0;
    PoissonPmf bright;
    PoissonPmf dark;
    double log_likelihood = 0.0;
    double weight_std_error = 0.0; // from the observed Fisher information
};

struct MixtureOptions {
    // When both means are set the component PMFs are fixed (calibrated mode)
    // and only the weight is fitted; otherwise the means are co-fitted by EM.
    std::optional<double> bright_mean;
    std::optional<double> dark_mean;
    int max_em_iterations = 500;
    double em_tolerance = 1e-10;
};

// Component means estimated from bright/dark reference histograms.
MixtureOptions calibration_from_references(const CountHistogram& bright_reference,
                                           const CountHistogram& dark_reference);

// Maximum-likelihood fit of w * PMF_bright + (1-w) * PMF_dark to the
// histogram. Throws FitError on non-identifiable input (e.g. a single bin
// with no calibration).
MixtureFit fit_histogram(const CountHistogram& hist, const MixtureOptions& options = {});

// Bright-manifold weight -> excited-state population before decay: 3/2 * w.
double population_from_bright_weight(double w);

// ---------------------------------------------------------------------------
// Rabi curve fitting
// ---------------------------------------------------------------------------

struct RabiDataPoint {
    double scatter_counts = 0.0;      // C_sc, proportional to pulse energy
    double excited_population = 0.0;  // in [0, 1.05]
    double population_std_error = 0.0;
};

// P_ex(alpha sqrt(C_sc), Delta, t_eff) with alpha the only fitted parameter.
struct RabiCurveModel {
    double alpha = 0.0; // rad/s per sqrt(count)
    Duration t_eff;
    AngularFrequency detuning;
    double alpha_variance = 0.0;
    FitResult diagnostics;

    double predict(double scatter_counts) const;
    double d_predict_d_alpha(double scatter_counts) const;
};

// Weighted nonlinear least squares over alpha with t_eff and detuning held
// fixed. Points with zero std error get unit weights and the variance is
// then scaled by the reduced chi-square. Throws InvalidInput on fewer than
// two distinct scatter_counts, FitError on non-convergence.
RabiCurveModel fit_rabi_curve(std::span<const RabiDataPoint> points, Duration t_eff,
                              AngularFrequency detuning, const LevMarOptions& options = {});

struct BandPoint {
    double scatter_counts = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct BandOptions {
    // Fixed-parameter uncertainties folded into the band in quadrature.
    double sigma_t_eff = 0.0;    // seconds
    double sigma_detuning = 0.0; // rad/s
};

// First-order band P +- n_sigma * sqrt((dP/dalpha sigma_alpha)^2 + ...).
std::vector<BandPoint> confidence_band(const RabiCurveModel& model,
                                       std::span<const double> scatter_count_grid,
                                       double n_sigma, const BandOptions& options = {});

// ---------------------------------------------------------------------------
// Gaussian spectral fitting
// ---------------------------------------------------------------------------

struct GaussianSpectrumFit {
    SpectrumModel model; // center, sigma, amplitude (instrument_sigma left 0)
    double baseline = 0.0;
    double center_std_error = 0.0;
    double sigma_std_error = 0.0;
    double amplitude_std_error = 0.0;
    double baseline_std_error = 0.0;
    FitResult diagnostics;
};

// Least squares of A exp(-(f - f0)^2 / (2 sigma^2)) + baseline. Requires at
// least 4 samples spanning a peak; throws FitError on flat, monotone, or
// noise-dominated data.
GaussianSpectrumFit fit_gaussian_spectrum(std::span<const SpectrumSample> samples);

} // namespace ionpulse
