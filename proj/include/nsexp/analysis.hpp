#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/expansion.hpp"
#include "nsexp/galerkin.hpp"
#include "nsexp/operators.hpp"
#include "nsexp/polynomial.hpp"

namespace nsexp {

/// Samples below this fraction of the series maximum are excluded from fits.
inline constexpr double kRelativeFloor = 1e-13;
/// A decay claim passes when slope <= -rate + kSlopeSlack and rms <= kRmsLimit.
inline constexpr double kSlopeSlack = 0.05;
inline constexpr double kRmsLimit = 0.1;
inline constexpr std::size_t kMinFitSamples = 8;

struct NormSeries {
    NormSpec spec;
    std::vector<double> times;
    std::vector<double> values;

    void validate() const {
        if (times.size() != values.size()) throw InvalidInput("norm series length mismatch");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (i > 0 && !(times[i] > times[i - 1])) throw InvalidInput("norm series times must increase");
            if (!(values[i] >= 0.0)) throw InvalidInput("norm series values must be non-negative");
        }
    }
};

struct FitWindow {
    double t_a = 0.0;
    double t_b = 0.0;
};

/// Tail window [0.6 T, 0.95 T].
inline FitWindow default_window(double horizon) { return {0.6 * horizon, 0.95 * horizon}; }

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    FitWindow window;
    std::size_t samples = 0;
    bool floor_dominated = false;
};

/// Least-squares line through (t, ln value) over the window. Samples at or
/// below the numerical floor (kRelativeFloor times the series maximum, or the
/// per-sample absolute floor when given) are skipped; when fewer than
/// kMinFitSamples survive the result is flagged floor-dominated.
inline RateFit fit_rate(const NormSeries& s, FitWindow window, const std::vector<double>* abs_floor = nullptr) {
    s.validate();
    if (!(window.t_a < window.t_b)) throw InvalidInput("fit window needs t_a < t_b");
    if (abs_floor && abs_floor->size() != s.values.size()) throw InvalidInput("floor series length mismatch");
    const double smax = s.values.empty() ? 0.0 : *std::max_element(s.values.begin(), s.values.end());
    const double rel_floor = kRelativeFloor * smax;

    std::size_t in_window = 0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double t = s.times[i];
        if (t < window.t_a || t > window.t_b) continue;
        ++in_window;
        const double v = s.values[i];
        if (!(v > rel_floor) || !(v > 0.0)) continue;
        if (abs_floor && !(v > (*abs_floor)[i])) continue;
        xs.push_back(t);
        ys.push_back(std::log(v));
    }
    RateFit fit;
    fit.window = window;
    fit.samples = xs.size();
    if (in_window < kMinFitSamples)
        throw TooFewSamples("fit window [" + std::to_string(window.t_a) + ", " + std::to_string(window.t_b) +
                            "] holds " + std::to_string(in_window) + " samples, need " +
                            std::to_string(kMinFitSamples));
    if (xs.size() < kMinFitSamples) {
        fit.floor_dominated = true;
        return fit;
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

/// Does the fit support decay at least as fast as e^{-rate t}?
inline bool meets_rate(const RateFit& fit, double rate) {
    return !fit.floor_dominated && fit.slope <= -rate + kSlopeSlack && fit.rms_residual <= kRmsLimit;
}

inline NormSeries norm_series(const Trajectory& traj, const NormSpec& spec) {
    spec.validate();
    NormSeries s{spec, traj.times, {}};
    s.values.reserve(traj.size());
    for (const auto& u : traj.states) s.values.push_back(norm(u, spec));
    return s;
}

namespace detail {

inline std::vector<ExpansionTerm> levels_up_to(const std::vector<ExpansionTerm>& terms, int N) {
    std::vector<ExpansionTerm> out;
    for (int n = 1; n <= N; ++n) {
        auto it = std::find_if(terms.begin(), terms.end(), [n](const ExpansionTerm& t) { return t.n == n; });
        if (it == terms.end()) throw MissingLevels("expansion level " + std::to_string(n) + " is missing");
        out.push_back(*it);
    }
    return out;
}

}  // namespace detail

/// |u(t_i) - Σ_{n<=N} q_n(t_i) e^{-n t_i}|_{alpha,sigma} per sample; N = 0 gives the norm series.
inline NormSeries remainder_series(const Trajectory& traj, const std::vector<ExpansionTerm>& terms, int N,
                                   const NormSpec& spec) {
    if (N < 0) throw InvalidInput("remainder order must be >= 0");
    spec.validate();
    const auto used = detail::levels_up_to(terms, N);
    NormSeries s{spec, traj.times, {}};
    s.values.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        s.values.push_back(norm(traj.states[i] - assemble(used, traj.times[i]), spec));
    return s;
}

struct ResonantFit {
    SpectralField xi;
    double stddev = 0.0;
    /// Change of the fitted constant across the window (least-squares trend).
    double drift = 0.0;
    bool contaminated = false;
    std::size_t samples = 0;
};

/// Estimates the resonant constant xi_n = R_n q_n(0) from a trajectory.
/// Over the window, w(t) = e^{n t} R_n(u(t) - Σ_{m<n} q_m(t) e^{-m t}) minus the
/// particular part of the resonant block (its solve with xi = 0) should be
/// constant; its mean is returned. The fit is flagged contaminated when the
/// trend across the window exceeds 10% of the constant.
inline ResonantFit fit_resonant_constant(const Trajectory& traj, const std::vector<ExpansionTerm>& terms_below,
                                         const ForceExpansion& force, int n, FitWindow window) {
    if (!is_eigenvalue(n)) throw NotAnEigenvalue(std::to_string(n) + " is not a Stokes eigenvalue (no k with |k|^2 = n)");
    if (!(window.t_a < window.t_b)) throw InvalidInput("fit window needs t_a < t_b");
    const auto below = detail::levels_up_to(terms_below, n - 1);
    const FieldPolynomial particular =
        resolvent_solve(poly_eigenspace_project(level_forcing(below, force, n), n), 0.0, SpectralField{});

    std::vector<double> ts;
    std::vector<SpectralField> ws;
    double ref = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t < window.t_a || t > window.t_b) continue;
        const double lift = std::exp(n * t);
        const SpectralField r = eigenspace_project(traj.states[i] - assemble(below, t), n);
        ws.push_back(SpectralField::combine(lift, r, -1.0, eigenspace_project(poly_eval(particular, t), n)));
        ts.push_back(t);
        ref = std::max(ref, lift * norm(traj.states[i]));
    }
    if (ws.size() < 2) throw TooFewSamples("resonant fit window holds fewer than 2 samples");

    ResonantFit fit;
    fit.samples = ws.size();
    const double m = static_cast<double>(ws.size());
    double tm = 0.0;
    for (double t : ts) tm += t;
    tm /= m;
    SpectralField mean, trend;
    double stt = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        mean = SpectralField::combine(1.0, mean, 1.0 / m, ws[i]);
        trend = SpectralField::combine(1.0, trend, ts[i] - tm, ws[i]);
        stt += (ts[i] - tm) * (ts[i] - tm);
    }
    double var = 0.0;
    for (const auto& w : ws) {
        const double d = norm(w - mean);
        var += d * d;
    }
    fit.xi = leray_project(mean);
    fit.stddev = std::sqrt(var / m);
    fit.drift = stt > 0.0 ? norm(trend) / stt * (window.t_b - window.t_a) : 0.0;
    fit.contaminated = fit.drift > 0.1 * norm(mean) + 1e-10 * ref;
    return fit;
}

struct CalibrationOptions {
    /// Levels beyond N included in the subtracted expansion.
    int extra_levels = 4;
    /// Refinement sweeps after the sequential first pass.
    int sweeps = 4;
};

/// Window used for level n: the lifted residual e^{n t} R_n(...) amplifies
/// rounding like e^{(n-1) t}, so higher levels use a shorter, earlier window.
inline FitWindow level_window(FitWindow w, int n) {
    if (n <= 2) return w;
    return {w.t_a, std::min(w.t_b, w.t_a + (w.t_b - w.t_a) * 2.0 / n)};
}

/// Estimates every resonant constant xi_n, n <= N + extra_levels, from a
/// trajectory. A sequential first pass applies fit_resonant_constant level by
/// level. Refinement sweeps then update each xi_n by the window mean of
/// e^{n t} R_n(u(t) - Σ_{m<=L} q_m(t) e^{-m t}), with all L levels subtracted,
/// which removes the e^{-t} contamination that higher levels leave in the
/// single-level estimate.
inline std::pair<ResonantData, std::map<int, ResonantFit>> calibrate_resonant_data(
    const Trajectory& traj, const ForceExpansion& force, int N, FitWindow window, CalibrationOptions opts = {}) {
    if (N < 1) throw InvalidInput("calibration order must be >= 1");
    const int L = N + std::max(0, opts.extra_levels);
    ResonantData data;
    std::map<int, ResonantFit> fits;
    for (int n = 1; n <= L; ++n) {
        if (!is_eigenvalue(n)) continue;
        std::vector<ExpansionTerm> below;
        if (n > 1) below = build_expansion(force, n - 1, data).terms;
        ResonantFit fit = fit_resonant_constant(traj, below, force, n, level_window(window, n));
        data[n] = fit.xi;
        fits[n] = std::move(fit);
    }
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
        for (int n = 1; n <= L; ++n) {
            if (!is_eigenvalue(n)) continue;
            const auto terms = build_expansion(force, L, data).terms;
            const FitWindow w = level_window(window, n);
            std::vector<SpectralField> lifted;
            std::vector<double> ts;
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const double t = traj.times[i];
                if (t < w.t_a || t > w.t_b) continue;
                lifted.push_back(std::exp(n * t) * eigenspace_project(traj.states[i] - assemble(terms, t), n));
                ts.push_back(t);
            }
            const double m = static_cast<double>(lifted.size());
            double tm = 0.0;
            for (double t : ts) tm += t;
            tm /= m;
            SpectralField mean, trend;
            double stt = 0.0;
            for (std::size_t i = 0; i < lifted.size(); ++i) {
                mean = SpectralField::combine(1.0, mean, 1.0 / m, lifted[i]);
                trend = SpectralField::combine(1.0, trend, ts[i] - tm, lifted[i]);
                stt += (ts[i] - tm) * (ts[i] - tm);
            }
            double var = 0.0;
            for (const auto& x : lifted) {
                const double d = norm(x - mean);
                var += d * d;
            }
            data[n] = leray_project(data[n] + mean);
            ResonantFit& fit = fits[n];
            fit.xi = data[n];
            fit.stddev = std::sqrt(var / m);
            fit.drift = stt > 0.0 ? norm(trend) / stt * (w.t_b - w.t_a) : 0.0;
            fit.contaminated = fit.drift > 0.1 * norm(fit.xi);
            fit.samples = lifted.size();
        }
    }
    // Only levels <= N carry verified constants.
    for (auto it = data.begin(); it != data.end();) it = it->first > N ? data.erase(it) : std::next(it);
    return {data, fits};
}

/// Trapezoidal integral of sampled values over [a, b], interpolating linearly at the ends.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& v, double a, double b) {
    if (t.size() != v.size() || t.size() < 2) throw InvalidInput("trapezoid needs matching series of length >= 2");
    if (a < t.front() - 1e-12 || b > t.back() + 1e-12 || a > b) throw InvalidInput("trapezoid interval out of range");
    auto interp = [&](double x) {
        auto it = std::upper_bound(t.begin(), t.end(), x);
        if (it == t.begin()) return v.front();
        if (it == t.end()) return v.back();
        const std::size_t j = static_cast<std::size_t>(it - t.begin());
        const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
        return (1.0 - w) * v[j - 1] + w * v[j];
    };
    double sum = 0.0;
    double xp = a, vp = interp(a);
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] <= a) continue;
        if (t[j] >= b) break;
        sum += 0.5 * (t[j] - xp) * (v[j] + vp);
        xp = t[j];
        vp = v[j];
    }
    sum += 0.5 * (b - xp) * (interp(b) + vp);
    return sum;
}

/// Parameters of the small-data decay certificate.
struct DecayCertificate {
    double alpha = 0.5;
    double delta = 0.5;
    double lambda = 1.0;
    double sigma = 0.0;
    double K = 2.0;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("certificate delta must lie in (0,1)");
        if (!(lambda > 1.0 - delta && lambda <= 1.0)) throw InvalidInput("certificate lambda must lie in (1-delta, 1]");
        if (!(alpha >= 0.5)) throw InvalidInput("certificate alpha must be >= 1/2");
        if (!(sigma >= 0.0)) throw InvalidInput("certificate sigma must be >= 0");
        if (!(K > 1.0)) throw InvalidInput("certificate K must exceed 1");
    }

    [[nodiscard]] double C0() const {
        return (sigma > 0.0 ? delta / 6.0 : delta / 4.0) / std::pow(K, alpha);
    }
    [[nodiscard]] double C1() const {
        const double r = std::sqrt(delta * (lambda - 1.0 + delta));
        return (sigma > 0.0 ? 2.0 / std::sqrt(3.0) : std::sqrt(2.0)) * r * C0();
    }
    [[nodiscard]] double t_star() const { return 6.0 * sigma / delta; }
};

struct CertificateRow {
    double t = 0.0;
    double norm_value = 0.0;
    double norm_bound = 0.0;
    /// NaN when [t, t+1] is not covered by the trajectory.
    double integral_value = std::numeric_limits<double>::quiet_NaN();
    double integral_bound = std::numeric_limits<double>::quiet_NaN();
};

struct CertificateReport {
    DecayCertificate cert;
    bool applicable = false;
    bool holds = false;
    std::vector<std::string> hypothesis_failures;
    std::vector<CertificateRow> rows;
    double min_norm_margin = std::numeric_limits<double>::infinity();
    double min_integral_margin = std::numeric_limits<double>::infinity();
};

/// Checks the small-data hypotheses |A^alpha u0| <= C0 and
/// |f(t)|_{alpha-1/2,sigma} <= C1 e^{-lambda t} on the samples, then the
/// conclusions |u(t)|_{alpha,sigma} <= sqrt(2) C0 e^{-(1-delta)t} and
/// ∫_t^{t+1} |u|^2_{alpha+1/2,sigma} <= 3 C0^2 / (2(1-delta)) e^{-2(1-delta)t} for t >= t_*.
inline CertificateReport certificate_check(const Trajectory& traj, const DecayCertificate& cert,
                                           const ForceExpansion& force) {
    cert.validate();
    CertificateReport rep;
    rep.cert = cert;
    if (traj.size() == 0) throw InvalidInput("empty trajectory");
    const double c0 = cert.C0(), c1 = cert.C1();
    const double u0n = norm(traj.states.front(), {cert.alpha, 0.0});
    if (u0n > c0) rep.hypothesis_failures.push_back("|A^alpha u0| = " + std::to_string(u0n) + " exceeds C0 = " + std::to_string(c0));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const double fn = norm(evaluate_force(force, t), {cert.alpha - 0.5, cert.sigma});
        if (fn > c1 * std::exp(-cert.lambda * t)) {
            rep.hypothesis_failures.push_back("force norm " + std::to_string(fn) + " exceeds C1 e^{-lambda t} at t = " +
                                              std::to_string(t));
            break;
        }
    }
    rep.applicable = rep.hypothesis_failures.empty();
    if (!rep.applicable) return rep;

    std::vector<double> sq;
    sq.reserve(traj.size());
    for (const auto& u : traj.states) {
        const double v = norm(u, {cert.alpha + 0.5, cert.sigma});
        sq.push_back(v * v);
    }
    const double rate = 1.0 - cert.delta;
    const double T = traj.times.back();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t < cert.t_star()) continue;
        CertificateRow row;
        row.t = t;
        row.norm_value = norm(traj.states[i], {cert.alpha, cert.sigma});
        row.norm_bound = std::sqrt(2.0) * c0 * std::exp(-rate * t);
        rep.min_norm_margin = std::min(rep.min_norm_margin, row.norm_bound - row.norm_value);
        if (t + 1.0 <= T + 1e-12) {
            row.integral_value = trapezoid(traj.times, sq, t, std::min(t + 1.0, T));
            row.integral_bound = 3.0 * c0 * c0 / (2.0 * rate) * std::exp(-2.0 * rate * t);
            rep.min_integral_margin = std::min(rep.min_integral_margin, row.integral_bound - row.integral_value);
        }
        rep.rows.push_back(row);
    }
    rep.holds = !rep.rows.empty() && rep.min_norm_margin > 0.0 && rep.min_integral_margin > 0.0;
    return rep;
}

struct EnergyBoundRow {
    double t = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

/// |u(t)|^2 against e^{-t}(|u0|^2 + M_*^2/kappa0), valid when |f(t)| <= M_* e^{-(1+kappa0)t/2}.
inline std::vector<EnergyBoundRow> energy_decay_rows(const Trajectory& traj, double m_star, double kappa0) {
    std::vector<EnergyBoundRow> rows;
    if (traj.size() == 0) return rows;
    const double u0 = norm(traj.states.front());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double v = norm(traj.states[i]);
        rows.push_back({traj.times[i], v * v, std::exp(-traj.times[i]) * (u0 * u0 + m_star * m_star / kappa0)});
    }
    return rows;
}

/// ∫_t^{t+1} ‖u‖^2 against e^{-t}(|u0|^2 + 2 M_*^2/kappa0) for every sample with t + 1 <= T.
inline std::vector<EnergyBoundRow> dissipation_rows(const Trajectory& traj, double m_star, double kappa0) {
    std::vector<EnergyBoundRow> rows;
    if (traj.size() < 2) return rows;
    const double u0 = norm(traj.states.front());
    std::vector<double> sq;
    for (const auto& u : traj.states) {
        const double v = norm(u, {0.5, 0.0});
        sq.push_back(v * v);
    }
    const double T = traj.times.back();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t + 1.0 > T + 1e-12) break;
        rows.push_back({t, trapezoid(traj.times, sq, t, std::min(t + 1.0, T)),
                        std::exp(-t) * (u0 * u0 + 2.0 * m_star * m_star / kappa0)});
    }
    return rows;
}

/// |B(u,v)|_{alpha,sigma} / (|u|_{alpha+1/2,sigma} |v|_{alpha+1/2,sigma}); the bilinear estimate says this is <= K^alpha.
inline double bilinear_ratio(const SpectralField& u, const SpectralField& v, const NormSpec& spec) {
    const NormSpec up{spec.alpha + 0.5, spec.sigma};
    const double den = norm(u, up) * norm(v, up);
    if (den == 0.0) return 0.0;
    return norm(bilinear(u, v), spec) / den;
}

}  // namespace nsexp
