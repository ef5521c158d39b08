#include "ionpulse/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ionpulse {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Solve A x = b for small symmetric positive definite A (in-place Cholesky).
// Returns false when A is not positive definite.
bool solve_spd(std::vector<std::vector<double>> a, std::vector<double> b,
               std::vector<double>& x) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        if (!(d > 0.0)) return false;
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            a[i][j] = s / a[j][j];
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * b[k];
        b[i] = s / a[i][i];
    }
    x.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k][ii] * x[k];
        x[ii] = s / a[ii][ii];
    }
    return true;
}

bool invert_spd(const std::vector<std::vector<double>>& a,
                std::vector<std::vector<double>>& inverse) {
    const std::size_t n = a.size();
    inverse.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        std::vector<double> col;
        if (!solve_spd(a, e, col)) return false;
        for (std::size_t i = 0; i < n; ++i) inverse[i][j] = col[i];
    }
    // symmetrize against round-off
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inverse[i][j] + inverse[j][i]);
            inverse[i][j] = inverse[j][i] = v;
        }
    return true;
}

double sum_of_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

} // namespace

FitResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                              std::vector<double> initial,
                              std::vector<std::string> parameter_names,
                              const LevMarOptions& options) {
    const std::size_t n = initial.size();
    if (n == 0) throw InvalidInput("levenberg_marquardt requires at least one parameter");

    std::vector<double> x = std::move(initial);
    std::vector<double> r = residuals(x);
    double sse = sum_of_squares(r);
    double damping = options.initial_damping;

    FitResult result;
    result.parameter_names = std::move(parameter_names);
    bool converged = false;
    int iteration = 0;

    std::vector<std::vector<double>> jac;
    while (iteration < options.max_iterations && !converged) {
        ++iteration;
        jac = jacobian(x);
        const std::size_t m = jac.size();

        // normal equations
        std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
        std::vector<double> jtr(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t a = 0; a < n; ++a) {
                jtr[a] += jac[i][a] * r[i];
                for (std::size_t b = a; b < n; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

        bool accepted = false;
        while (!accepted && damping < 1e16) {
            auto damped = jtj;
            for (std::size_t a = 0; a < n; ++a) {
                const double scale = jtj[a][a] > 0.0 ? jtj[a][a] : 1.0;
                damped[a][a] += damping * scale;
            }
            std::vector<double> rhs(n);
            for (std::size_t a = 0; a < n; ++a) rhs[a] = -jtr[a];
            std::vector<double> step;
            if (!solve_spd(damped, rhs, step)) {
                damping *= options.damping_increase;
                continue;
            }
            std::vector<double> x_new(n);
            for (std::size_t a = 0; a < n; ++a) x_new[a] = x[a] + step[a];
            std::vector<double> r_new = residuals(x_new);
            const double sse_new = sum_of_squares(r_new);
            if (sse_new <= sse) {
                const double step_norm = std::sqrt(sum_of_squares(step));
                const double x_norm = std::sqrt(sum_of_squares(x_new));
                x = std::move(x_new);
                r = std::move(r_new);
                sse = sse_new;
                damping *= options.damping_decrease;
                accepted = true;
                if (step_norm <= options.parameter_tolerance * (x_norm + options.parameter_tolerance))
                    converged = true;
            } else {
                damping *= options.damping_increase;
            }
        }
        if (!accepted) break; // damping exhausted; current x is the best point
    }

    result.parameters = x;
    result.residual_norm = std::sqrt(sse);
    result.iterations = iteration;
    result.converged = converged;

    // covariance from the undamped normal equations at the solution
    jac = jacobian(x);
    std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
    for (const auto& row : jac)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) jtj[a][b] += row[a] * row[b];
    if (!invert_spd(jtj, result.covariance))
        result.covariance.assign(n, std::vector<double>(n,
                                 std::numeric_limits<double>::quiet_NaN()));

    if (!converged) {
        std::ostringstream msg;
        msg << "levenberg_marquardt failed to converge after " << iteration
            << " iterations; residual_norm=" << result.residual_norm << "; parameters=";
        for (std::size_t a = 0; a < n; ++a)
            msg << (a ? "," : "") << result.parameter_names[a] << "=" << x[a];
        throw FitError(msg.str());
    }
    return result;
}

std::vector<std::vector<double>> finite_difference_jacobian(const ResidualFn& residuals,
                                                            const std::vector<double>& at,
                                                            double step) {
    if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
    const std::size_t n = at.size();
    std::vector<std::vector<double>> jac;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> plus = at, minus = at;
        plus[j] += step;
        minus[j] -= step;
        const std::vector<double> rp = residuals(plus);
        const std::vector<double> rm = residuals(minus);
        if (jac.empty()) jac.assign(rp.size(), std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < rp.size(); ++i)
            jac[i][j] = (rp[i] - rm[i]) / (2.0 * step);
    }
    if (jac.empty()) jac.assign(residuals(at).size(), std::vector<double>(n, 0.0));
    return jac;
}

// ---------------------------------------------------------------------------
// Mixture fitting
// ---------------------------------------------------------------------------

double PoissonPmf::log_pmf(int k) const {
    if (k < 0) return neg_inf;
    if (mean <= 0.0) return k == 0 ? 0.0 : neg_inf;
    return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

double PoissonPmf::pmf(int k) const { return std::exp(log_pmf(k)); }

namespace {

struct MixtureBin {
    int count;
    double occurrences;
    double log_pb;
    double log_pd;
};

// log(w e^lb + (1-w) e^ld), safe at w = 0 or 1 and with -inf components.
double log_mix(double w, double lb, double ld) {
    const double a = w > 0.0 ? std::log(w) + lb : neg_inf;
    const double b = w < 1.0 ? std::log1p(-w) + ld : neg_inf;
    const double m = std::max(a, b);
    if (m == neg_inf) return neg_inf;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double mixture_log_likelihood(double w, const std::vector<MixtureBin>& bins) {
    double ll = 0.0;
    for (const auto& bin : bins) ll += bin.occurrences * log_mix(w, bin.log_pb, bin.log_pd);
    return ll;
}

// First derivative of the log likelihood and the observed information
// (-second derivative), which for this mixture is the sum of squared
// per-observation score terms.
void mixture_score(double w, const std::vector<MixtureBin>& bins, double& score,
                   double& information) {
    score = 0.0;
    information = 0.0;
    for (const auto& bin : bins) {
        const double lm = log_mix(w, bin.log_pb, bin.log_pd);
        if (lm == neg_inf) {
            score += bin.log_pb > bin.log_pd ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
            continue;
        }
        const double u = std::exp(bin.log_pb - lm);
        const double v = std::exp(bin.log_pd - lm);
        score += bin.occurrences * (u - v);
        information += bin.occurrences * (u - v) * (u - v);
    }
}

// Concave 1-D maximization of the mixture likelihood over w in [0,1]:
// safeguarded Newton on the score, falling back to bisection of the bracket.
double maximize_mixture_weight(const std::vector<MixtureBin>& bins) {
    double lo = 0.0, hi = 1.0;
    double w = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        double score, info;
        mixture_score(w, bins, score, info);
        if (score > 0.0)
            lo = w;
        else
            hi = w;
        double next = info > 0.0 && std::isfinite(score) ? w + score / info : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - w) < 1e-14) return next;
        w = next;
    }
    return w;
}

} // namespace

MixtureOptions calibration_from_references(const CountHistogram& bright_reference,
                                           const CountHistogram& dark_reference) {
    if (bright_reference.total() == 0 || dark_reference.total() == 0)
        throw InvalidInput("calibration reference histograms must be non-empty");
    MixtureOptions options;
    options.bright_mean = bright_reference.mean();
    options.dark_mean = dark_reference.mean();
    return options;
}

MixtureFit fit_histogram(const CountHistogram& hist, const MixtureOptions& options) {
    if (hist.total() == 0) throw InvalidInput("histogram is empty");

    const bool calibrated = options.bright_mean.has_value() && options.dark_mean.has_value();
    if (!calibrated && hist.bins().size() < 2)
        throw FitError("mixture fit is non-identifiable: single-bin histogram "
                       "without calibration");

    MixtureFit fit;
    std::vector<MixtureBin> bins;
    bins.reserve(hist.bins().size());

    if (calibrated) {
        fit.bright = PoissonPmf{*options.bright_mean};
        fit.dark = PoissonPmf{*options.dark_mean};
        for (const auto& [count, occurrences] : hist.bins())
            bins.push_back({count, static_cast<double>(occurrences),
                            fit.bright.log_pmf(count), fit.dark.log_pmf(count)});
        fit.bright_weight = maximize_mixture_weight(bins);
    } else {
        // EM over (w, bright mean, dark mean), split at the overall mean.
        const double overall = hist.mean();
        double n_low = 0.0, n_high = 0.0, s_low = 0.0, s_high = 0.0;
        for (const auto& [count, occurrences] : hist.bins()) {
            const double n = static_cast<double>(occurrences);
            if (count <= overall) {
                n_low += n;
                s_low += n * count;
            } else {
                n_high += n;
                s_high += n * count;
            }
        }
        double dark_mean = n_low > 0.0 ? s_low / n_low : 0.0;
        double bright_mean = n_high > 0.0 ? s_high / n_high : dark_mean + 1.0;
        if (bright_mean <= dark_mean) bright_mean = dark_mean + 1.0;
        double w = n_high / static_cast<double>(hist.total());
        w = std::clamp(w, 1e-6, 1.0 - 1e-6);

        double ll_prev = neg_inf;
        for (int iter = 0; iter < options.max_em_iterations; ++iter) {
            const PoissonPmf pb{bright_mean}, pd{dark_mean};
            double nb = 0.0, nd = 0.0, sb = 0.0, sd = 0.0, ll = 0.0;
            for (const auto& [count, occurrences] : hist.bins()) {
                const double n = static_cast<double>(occurrences);
                const double lb = (w > 0.0 ? std::log(w) : neg_inf) + pb.log_pmf(count);
                const double ld = (w < 1.0 ? std::log1p(-w) : neg_inf) + pd.log_pmf(count);
                const double m = std::max(lb, ld);
                const double denom = std::exp(lb - m) + std::exp(ld - m);
                const double resp = std::exp(lb - m) / denom;
                nb += n * resp;
                nd += n * (1.0 - resp);
                sb += n * resp * count;
                sd += n * (1.0 - resp) * count;
                ll += n * (m + std::log(denom));
            }
            w = nb / static_cast<double>(hist.total());
            if (nb > 0.0) bright_mean = sb / nb;
            if (nd > 0.0) dark_mean = sd / nd;
            if (bright_mean < dark_mean) {
                std::swap(bright_mean, dark_mean);
                w = 1.0 - w;
            }
            if (std::abs(ll - ll_prev) < options.em_tolerance * (1.0 + std::abs(ll))) break;
            ll_prev = ll;
        }
        fit.bright = PoissonPmf{bright_mean};
        fit.dark = PoissonPmf{dark_mean};
        for (const auto& [count, occurrences] : hist.bins())
            bins.push_back({count, static_cast<double>(occurrences),
                            fit.bright.log_pmf(count), fit.dark.log_pmf(count)});
        fit.bright_weight = std::clamp(w, 0.0, 1.0);
    }

    if (fit.bright_weight < 1e-12) fit.bright_weight = 0.0;
    if (fit.bright_weight > 1.0 - 1e-12) fit.bright_weight = 1.0;

    double score, information;
    mixture_score(fit.bright_weight, bins, score, information);
    if (!(information > 0.0) || !std::isfinite(information))
        throw FitError("mixture fit is non-identifiable: components coincide on the data");
    fit.weight_std_error = 1.0 / std::sqrt(information);
    fit.log_likelihood = mixture_log_likelihood(fit.bright_weight, bins);
    return fit;
}

double population_from_bright_weight(double w) {
    if (!(w >= 0.0 && w <= 1.0))
        throw InvalidInput("bright weight must be in [0,1]");
    return 1.5 * w;
}

// ---------------------------------------------------------------------------
// Rabi curve fitting
// ---------------------------------------------------------------------------

double RabiCurveModel::predict(double scatter_counts) const {
    const double omega = alpha * std::sqrt(std::max(scatter_counts, 0.0));
    return excitation_probability_rect({AngularFrequency(omega), detuning, t_eff});
}

double RabiCurveModel::d_predict_d_alpha(double scatter_counts) const {
    const double root_c = std::sqrt(std::max(scatter_counts, 0.0));
    const double omega = alpha * root_c;
    const auto grad =
        excitation_probability_rect_gradient({AngularFrequency(omega), detuning, t_eff});
    return grad.d_omega * root_c;
}

namespace {

double rect_probability(double omega, double delta, double t) {
    const double w2 = omega * omega + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * t * std::sqrt(w2));
    return omega * omega / w2 * s * s;
}

// Initial guess: take the first point (in increasing C_sc) past half of the
// maximum population and solve the curve equation for alpha on a coarse log
// grid, keeping the smallest crossing so the guess sits on the first rising
// edge (the curve aliases at higher alpha).
double initial_alpha_guess(std::span<const RabiDataPoint> points, double t_eff, double delta) {
    std::vector<RabiDataPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const RabiDataPoint& a, const RabiDataPoint& b) {
                  return a.scatter_counts < b.scatter_counts;
              });
    double y_max = 0.0;
    for (const auto& p : sorted) y_max = std::max(y_max, p.excited_population);
    if (y_max <= 0.0)
        throw FitError("rabi fit: all populations are zero, alpha is unconstrained");

    const RabiDataPoint* anchor = nullptr;
    for (const auto& p : sorted) {
        if (p.scatter_counts > 0.0 && p.excited_population >= 0.5 * y_max) {
            anchor = &p;
            break;
        }
    }
    if (!anchor)
        throw FitError("rabi fit: no usable point past half maximum");

    const double root_c = std::sqrt(anchor->scatter_counts);
    const double alpha_pi = 3.14159265358979323846 / (t_eff * root_c);

    const int grid_size = 600;
    const double lo = 1e-3 * alpha_pi, hi = 1e3 * alpha_pi;
    const double log_step = std::log(hi / lo) / (grid_size - 1);
    double p_sup = 0.0;
    std::vector<double> grid_alpha(grid_size), grid_p(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        grid_alpha[i] = lo * std::exp(i * log_step);
        grid_p[i] = rect_probability(grid_alpha[i] * root_c, delta, t_eff);
        p_sup = std::max(p_sup, grid_p[i]);
    }
    const double y_target = std::min(anchor->excited_population, 0.98 * p_sup);

    for (int i = 1; i < grid_size; ++i) {
        if (grid_p[i - 1] < y_target && grid_p[i] >= y_target) {
            double a = grid_alpha[i - 1], b = grid_alpha[i];
            for (int k = 0; k < 50; ++k) {
                const double mid = 0.5 * (a + b);
                if (rect_probability(mid * root_c, delta, t_eff) < y_target)
                    a = mid;
                else
                    b = mid;
            }
            return 0.5 * (a + b);
        }
    }
    // no crossing; fall back to the grid argmax
    const auto it = std::max_element(grid_p.begin(), grid_p.end());
    return grid_alpha[static_cast<std::size_t>(it - grid_p.begin())];
}

} // namespace

RabiCurveModel fit_rabi_curve(std::span<const RabiDataPoint> points, Duration t_eff,
                              AngularFrequency detuning, const LevMarOptions& options) {
    if (t_eff.seconds() <= 0.0) throw InvalidInput("t_eff must be positive");

    std::vector<double> distinct;
    for (const auto& p : points) {
        if (!(p.scatter_counts >= 0.0) || !std::isfinite(p.scatter_counts))
            throw InvalidInput("scatter_counts must be finite and non-negative");
        if (!(p.excited_population >= 0.0 && p.excited_population <= 1.05))
            throw InvalidInput("excited_population must be in [0, 1.05]");
        if (p.population_std_error < 0.0)
            throw InvalidInput("population_std_error must be non-negative");
        distinct.push_back(p.scatter_counts);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
        throw InvalidInput("rabi fit is non-identifiable: need >= 2 points with "
                           "distinct scatter_counts");

    const double t = t_eff.seconds();
    const double delta = detuning.radians_per_second();
    const bool weighted = std::all_of(points.begin(), points.end(), [](const RabiDataPoint& p) {
        return p.population_std_error > 0.0;
    });

    std::vector<double> weights(points.size(), 1.0);
    if (weighted)
        for (std::size_t i = 0; i < points.size(); ++i)
            weights[i] = 1.0 / points[i].population_std_error;

    auto model_at = [&](double alpha, double c_sc) {
        return rect_probability(alpha * std::sqrt(c_sc), delta, t);
    };
    ResidualFn residuals = [&](const std::vector<double>& params) {
        std::vector<double> r(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            r[i] = weights[i] *
                   (model_at(params[0], points[i].scatter_counts) - points[i].excited_population);
        return r;
    };
    JacobianFn jacobian = [&](const std::vector<double>& params) {
        std::vector<std::vector<double>> jac(points.size(), std::vector<double>(1, 0.0));
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double root_c = std::sqrt(points[i].scatter_counts);
            const double omega = params[0] * root_c;
            const auto grad = excitation_probability_rect_gradient(
                {AngularFrequency(std::abs(omega)), detuning, t_eff});
            const double sign = omega < 0.0 ? -1.0 : 1.0;
            jac[i][0] = weights[i] * grad.d_omega * root_c * sign;
        }
        return jac;
    };

    const double alpha0 = initial_alpha_guess(points, t, delta);
    FitResult result = levenberg_marquardt(residuals, jacobian, {alpha0}, {"alpha"}, options);

    RabiCurveModel model;
    model.alpha = std::abs(result.parameters[0]);
    model.t_eff = t_eff;
    model.detuning = detuning;
    double variance = result.covariance[0][0];
    if (!weighted && points.size() > 1) {
        const double dof = static_cast<double>(points.size()) - 1.0;
        variance *= result.residual_norm * result.residual_norm / dof;
    }
    model.alpha_variance = variance;
    model.diagnostics = std::move(result);
    return model;
}

std::vector<BandPoint> confidence_band(const RabiCurveModel& model,
                                       std::span<const double> scatter_count_grid,
                                       double n_sigma, const BandOptions& options) {
    if (!model.diagnostics.converged)
        throw InvalidInput("confidence_band requires a converged model");
    if (n_sigma < 0.0) throw InvalidInput("n_sigma must be non-negative");

    const double sigma_alpha =
        model.alpha_variance > 0.0 ? std::sqrt(model.alpha_variance) : 0.0;
    std::vector<BandPoint> band;
    band.reserve(scatter_count_grid.size());
    for (double c_sc : scatter_count_grid) {
        const double p = model.predict(c_sc);
        const double d_alpha = model.d_predict_d_alpha(c_sc);
        const double omega = model.alpha * std::sqrt(std::max(c_sc, 0.0));
        const auto grad = excitation_probability_rect_gradient(
            {AngularFrequency(omega), model.detuning, model.t_eff});
        const double var = d_alpha * d_alpha * sigma_alpha * sigma_alpha +
                           grad.d_duration * grad.d_duration * options.sigma_t_eff *
                               options.sigma_t_eff +
                           grad.d_detuning * grad.d_detuning * options.sigma_detuning *
                               options.sigma_detuning;
        const double half_width = n_sigma * std::sqrt(var);
        band.push_back({c_sc, p - half_width, p + half_width});
    }
    return band;
}

// ---------------------------------------------------------------------------
// Gaussian spectral fitting
// ---------------------------------------------------------------------------

GaussianSpectrumFit fit_gaussian_spectrum(std::span<const SpectrumSample> samples) {
    if (samples.size() < 4)
        throw InvalidInput("gaussian spectrum fit needs at least 4 samples");

    std::vector<SpectrumSample> data(samples.begin(), samples.end());
    std::sort(data.begin(), data.end(), [](const SpectrumSample& a, const SpectrumSample& b) {
        return a.frequency_hz < b.frequency_hz;
    });

    double a_min = data.front().amplitude, a_max = data.front().amplitude;
    bool increasing = true, decreasing = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
        a_min = std::min(a_min, data[i].amplitude);
        a_max = std::max(a_max, data[i].amplitude);
        if (i > 0) {
            if (data[i].amplitude < data[i - 1].amplitude) increasing = false;
            if (data[i].amplitude > data[i - 1].amplitude) decreasing = false;
        }
    }
    if (a_max <= a_min) throw FitError("gaussian spectrum fit: flat data");
    if (increasing || decreasing)
        throw FitError("gaussian spectrum fit: monotone data, no interior peak");

    const double f_lo = data.front().frequency_hz;
    const double f_hi = data.back().frequency_hz;
    const double span = f_hi - f_lo;
    if (!(span > 0.0)) throw InvalidInput("samples must span distinct frequencies");

    // moment-based starting point
    double w_sum = 0.0, wf_sum = 0.0;
    for (const auto& s : data) {
        const double w = std::max(s.amplitude - a_min, 0.0);
        w_sum += w;
        wf_sum += w * s.frequency_hz;
    }
    const double f0_init = wf_sum / w_sum;
    double wss = 0.0;
    for (const auto& s : data) {
        const double w = std::max(s.amplitude - a_min, 0.0);
        wss += w * (s.frequency_hz - f0_init) * (s.frequency_hz - f0_init);
    }
    double sigma_init = std::sqrt(wss / w_sum);
    if (!(sigma_init > 0.0)) sigma_init = span / 6.0;

    ResidualFn residuals = [&](const std::vector<double>& p) {
        const double amp = p[0], f0 = p[1], sigma = p[2], base = p[3];
        std::vector<double> r(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double z = (data[i].frequency_hz - f0) / sigma;
            r[i] = amp * std::exp(-0.5 * z * z) + base - data[i].amplitude;
        }
        return r;
    };
    JacobianFn jacobian = [&](const std::vector<double>& p) {
        const double amp = p[0], f0 = p[1], sigma = p[2];
        std::vector<std::vector<double>> jac(data.size(), std::vector<double>(4, 0.0));
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double df = data[i].frequency_hz - f0;
            const double z = df / sigma;
            const double g = std::exp(-0.5 * z * z);
            jac[i][0] = g;
            jac[i][1] = amp * g * df / (sigma * sigma);
            jac[i][2] = amp * g * df * df / (sigma * sigma * sigma);
            jac[i][3] = 1.0;
        }
        return jac;
    };

    FitResult result;
    try {
        result = levenberg_marquardt(residuals, jacobian,
                                     {a_max - a_min, f0_init, sigma_init, a_min},
                                     {"amplitude", "center", "sigma", "baseline"});
    } catch (const FitError& err) {
        throw FitError(std::string("gaussian spectrum fit: ") + err.what());
    }

    const double amp = result.parameters[0];
    const double center = result.parameters[1];
    const double sigma = std::abs(result.parameters[2]);
    const double base = result.parameters[3];

    // reject fits that do not describe a resolved peak inside the data
    double spacing_sum = 0.0;
    for (std::size_t i = 1; i < data.size(); ++i)
        spacing_sum += data[i].frequency_hz - data[i - 1].frequency_hz;
    const double mean_spacing = spacing_sum / static_cast<double>(data.size() - 1);
    const double dof = std::max<double>(1.0, static_cast<double>(data.size()) - 4.0);
    const double residual_rms = result.residual_norm / std::sqrt(dof);
    if (amp <= 0.0 || center < f_lo || center > f_hi || sigma < 0.5 * mean_spacing ||
        sigma > span)
        throw FitError("gaussian spectrum fit: no resolved peak in the data");
    if (amp < 3.0 * residual_rms)
        throw FitError("gaussian spectrum fit: peak is not significant above the residuals");

    GaussianSpectrumFit fit;
    fit.model.amplitude = amp;
    fit.model.center_frequency_hz = center;
    fit.model.sigma_hz = sigma;
    fit.baseline = base;

    const double s2 = residual_rms * residual_rms;
    auto std_error = [&](std::size_t i) {
        const double v = result.covariance[i][i];
        return v > 0.0 ? std::sqrt(v * s2) : 0.0;
    };
    fit.amplitude_std_error = std_error(0);
    fit.center_std_error = std_error(1);
    fit.sigma_std_error = std_error(2);
    fit.baseline_std_error = std_error(3);
    fit.diagnostics = std::move(result);
    return fit;
}

} // namespace ionpulse
