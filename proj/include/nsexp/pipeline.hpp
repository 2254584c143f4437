#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsexp/analysis.hpp"
#include "nsexp/expansion.hpp"
#include "nsexp/galerkin.hpp"
#include "nsexp/io.hpp"

namespace nsexp {

/// Samples of a remainder at or below this fraction of |u(t)| in the same
/// norm are treated as unresolved (rounding level of the trajectory).
inline constexpr double kResolutionFloor = 1e-12;
inline constexpr double kResidualLimit = 1e-10;

enum class ExitCode : int { ok = 0, runtime_error = 1, checks_failed = 2, inconclusive = 3 };

struct ExpansionSettings {
    int n_max = 1;
    ResonantData resonant;
    /// Estimate the resonant constants from the simulated trajectory.
    bool fit_resonant = false;
    std::optional<FitWindow> resonant_window;
    double target_epsilon = 0.5;
    std::vector<NormSpec> norms;
    std::optional<FitWindow> rate_window;
};

/// |f(t)| <= M_* e^{-(1+kappa0)t/2}; enables the energy-decay checks in certify.
struct EnergyBound {
    double m_star = 0.0;
    double kappa0 = 1.0;
};

struct Scenario {
    std::string name;
    ForceExpansion force;
    SpectralField initial;
    ExpansionSettings expansion;
    SolverConfig solver;
    std::vector<DecayCertificate> certificates;
    std::optional<EnergyBound> energy_bound;
    std::string output_dir = "out";

    [[nodiscard]] FitWindow rate_window() const { return expansion.rate_window.value_or(default_window(solver.t_end)); }
    [[nodiscard]] FitWindow resonant_window() const {
        return expansion.resonant_window.value_or(FitWindow{0.25 * solver.t_end, solver.t_end * 2.0 / 3.0});
    }
};

namespace detail {

inline FitWindow window_from_json(const io::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw io::SchemaError(path, "expected [t_a, t_b]");
    FitWindow w{io::detail::number(j[0], path + "[0]"), io::detail::number(j[1], path + "[1]")};
    if (!(w.t_a < w.t_b)) throw io::SchemaError(path, "needs t_a < t_b");
    return w;
}

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const io::SchemaError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw io::SchemaError(path, e.what());
    }
}

}  // namespace detail

inline Scenario scenario_from_json(const io::json& j) {
    using io::detail::integer;
    using io::detail::member;
    using io::detail::number;
    const std::string root = "scenario";
    if (!j.is_object()) throw io::SchemaError(root, "expected an object");
    Scenario s;
    const io::json& name = member(j, "name", root);
    if (!name.is_string() || name.get<std::string>().empty()) throw io::SchemaError(root + ".name", "expected a non-empty string");
    s.name = name.get<std::string>();
    if (s.name.find('/') != std::string::npos || s.name == "." || s.name == "..")
        throw io::SchemaError(root + ".name", "must be usable as a directory name");

    s.force = io::force_from_json(member(j, "force", root), root + ".force");
    if (j.contains("initial")) s.initial = io::field_from_json(j["initial"], root + ".initial");
    detail::with_path(root + ".initial", [&] {
        require_divergence_free(s.initial, "initial state");
        return 0;
    });

    const std::string ep = root + ".expansion";
    const io::json& ex = member(j, "expansion", root);
    s.expansion.n_max = static_cast<int>(integer(member(ex, "N_max", ep), ep + ".N_max"));
    if (s.expansion.n_max < 1) throw io::SchemaError(ep + ".N_max", "must be >= 1");
    if (ex.contains("resonant")) s.expansion.resonant = io::resonant_from_json(ex["resonant"], ep + ".resonant");
    if (ex.contains("fit_resonant")) {
        if (!ex["fit_resonant"].is_boolean()) throw io::SchemaError(ep + ".fit_resonant", "expected a boolean");
        s.expansion.fit_resonant = ex["fit_resonant"].get<bool>();
    }
    if (ex.contains("resonant_window"))
        s.expansion.resonant_window = detail::window_from_json(ex["resonant_window"], ep + ".resonant_window");
    if (ex.contains("rate_window")) s.expansion.rate_window = detail::window_from_json(ex["rate_window"], ep + ".rate_window");
    if (ex.contains("target_epsilon")) {
        s.expansion.target_epsilon = number(ex["target_epsilon"], ep + ".target_epsilon");
        if (!(s.expansion.target_epsilon > 0.0 && s.expansion.target_epsilon < 1.0))
            throw io::SchemaError(ep + ".target_epsilon", "must lie in (0,1)");
    }
    const io::json& norms = member(ex, "norms", ep);
    if (!norms.is_array() || norms.empty()) throw io::SchemaError(ep + ".norms", "expected a non-empty array");
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const std::string p = ep + ".norms[" + std::to_string(i) + "]";
        NormSpec ns{number(member(norms[i], "alpha", p), p + ".alpha"), number(member(norms[i], "sigma", p), p + ".sigma")};
        detail::with_path(p, [&] {
            ns.validate();
            return 0;
        });
        s.expansion.norms.push_back(ns);
    }

    const std::string sp = root + ".solver";
    const io::json& sv = member(j, "solver", root);
    s.solver.mode_cutoff = integer(member(sv, "mode_cutoff", sp), sp + ".mode_cutoff");
    s.solver.step = number(member(sv, "step", sp), sp + ".step");
    s.solver.t_end = number(member(sv, "t_end", sp), sp + ".t_end");
    s.solver.sample_stride = static_cast<int>(integer(member(sv, "sample_stride", sp), sp + ".sample_stride"));
    detail::with_path(sp, [&] {
        s.solver.validate();
        if (s.force.max_eigenvalue() > s.solver.mode_cutoff)
            throw InvalidInput("mode_cutoff is below the largest force eigenvalue " + std::to_string(s.force.max_eigenvalue()));
        return 0;
    });

    if (j.contains("certificates")) {
        const io::json& cs = j["certificates"];
        if (!cs.is_array()) throw io::SchemaError(root + ".certificates", "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string p = root + ".certificates[" + std::to_string(i) + "]";
            DecayCertificate c;
            c.alpha = number(member(cs[i], "alpha", p), p + ".alpha");
            c.delta = number(member(cs[i], "delta", p), p + ".delta");
            c.lambda = number(member(cs[i], "lambda", p), p + ".lambda");
            c.sigma = number(member(cs[i], "sigma", p), p + ".sigma");
            if (cs[i].contains("K")) c.K = number(cs[i]["K"], p + ".K");
            detail::with_path(p, [&] {
                c.validate();
                return 0;
            });
            s.certificates.push_back(c);
        }
    }
    if (j.contains("energy_bound")) {
        const std::string p = root + ".energy_bound";
        EnergyBound eb{number(member(j["energy_bound"], "M_star", p), p + ".M_star"),
                       number(member(j["energy_bound"], "kappa0", p), p + ".kappa0")};
        if (!(eb.m_star >= 0.0) || !(eb.kappa0 > 0.0)) throw io::SchemaError(p, "needs M_star >= 0 and kappa0 > 0");
        s.energy_bound = eb;
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw io::SchemaError(root + ".output_dir", "expected a string");
        s.output_dir = j["output_dir"].get<std::string>();
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& p) { return scenario_from_json(io::read_json_file(p)); }

/// Runs the pipeline stages for one scenario, caching the trajectory and the
/// expansion between stages. Every stage writes below <out_root>/<name>/.
class Pipeline {
public:
    Pipeline(Scenario scenario, std::filesystem::path out_root)
        : sc_(std::move(scenario)), dir_(std::move(out_root) / sc_.name) {}

    [[nodiscard]] const Scenario& scenario() const { return sc_; }
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

    const Trajectory& trajectory() {
        if (!traj_) traj_ = integrate(sc_.initial, sc_.force, sc_.solver);
        return *traj_;
    }

    /// Expansion with resonant constants from the scenario, or fitted from the trajectory.
    const ExpansionResult& expansion() {
        if (!expansion_) {
            resonant_ = sc_.expansion.resonant;
            if (sc_.expansion.fit_resonant) {
                auto [data, fits] = calibrate_resonant_data(trajectory(), sc_.force, sc_.expansion.n_max, sc_.resonant_window());
                for (auto& [n, xi] : data) resonant_[n] = xi;
                fits_ = std::move(fits);
            }
            expansion_ = build_expansion(sc_.force, sc_.expansion.n_max, resonant_);
        }
        return *expansion_;
    }

    [[nodiscard]] const ResonantData& resonant_data() const { return resonant_; }
    [[nodiscard]] const std::map<int, ResonantFit>& resonant_fits() const { return fits_; }

    /// Uses the given q_n instead of building them (e.g. re-ingested documents).
    void override_expansion(std::vector<ExpansionTerm> terms) {
        ExpansionResult r;
        r.terms = std::move(terms);
        for (const auto& t : r.terms) r.residuals[t.n] = expansion_residual(r.terms, sc_.force, t.n);
        expansion_ = std::move(r);
        overridden_ = true;
    }

    ExitCode run_expand() {
        const ExpansionResult& ex = expansion();
        io::write_json(dir_ / "expansion" / "expansion.json", io::expansion_to_json(ex, resonant_));
        bool ok = true;
        std::ostringstream rep;
        rep << "scenario: " << sc_.name << "\nN_max: " << sc_.expansion.n_max << "\n";
        for (const auto& t : ex.terms) {
            io::json doc = io::poly_to_json(t.q);
            doc["n"] = t.n;
            io::write_json(dir_ / "expansion" / ("q_" + std::to_string(t.n) + ".json"), doc);
            const double r = ex.residuals.at(t.n);
            ok = ok && r <= kResidualLimit;
            rep << "level " << t.n << ": degree " << (t.q.is_zero() ? std::string("zero") : std::to_string(t.q.degree()))
                << ", modes " << support_size(t.q) << ", residual " << io::fmt(r)
                << (r <= kResidualLimit ? " ok" : " FAIL") << "\n";
        }
        for (const auto& h : ex.resonance_log) rep << "resonance: level " << h.n << " eigenvalue " << h.eigenvalue << "\n";
        for (const auto& [n, f] : fits_)
            rep << "resonant fit: level " << n << " |xi| " << io::fmt(norm(f.xi)) << " stddev " << io::fmt(f.stddev)
                << " drift " << io::fmt(f.drift) << (f.contaminated ? " contaminated" : "") << "\n";
        rep << "result: " << (ok ? "pass" : "fail") << "\n";
        io::write_text(dir_ / "reports" / "expand.txt", rep.str());
        return ok ? ExitCode::ok : ExitCode::checks_failed;
    }

    ExitCode run_simulate() {
        const Trajectory& tr = trajectory();
        io::write_text(dir_ / "trajectory.csv", io::trajectory_csv(tr));
        io::write_text(dir_ / "trajectory_modes.csv", io::mode_manifest_csv(tr));
        for (const auto& spec : sc_.expansion.norms)
            io::write_text(dir_ / "norms" / ("norm_" + io::spec_label(spec) + ".csv"), io::series_csv(norm_series(tr, spec)));
        const auto defects = energy_ledger(tr, sc_.force);
        std::ostringstream os;
        os << "t_start,defect_per_unit_time\n";
        for (std::size_t i = 0; i < defects.size(); ++i) os << io::fmt(tr.times[i]) << "," << io::fmt(defects[i]) << "\n";
        io::write_text(dir_ / "reports" / "energy_ledger.csv", os.str());
        return ExitCode::ok;
    }

    enum class Verdict { pass, fail, inconclusive };

    struct VerifyRow {
        int N = 0;
        NormSpec spec;
        RateFit fit;
        Verdict verdict = Verdict::inconclusive;
        std::string note;
    };

    [[nodiscard]] const std::vector<VerifyRow>& verify_rows() const { return rows_; }

    ExitCode run_verify() {
        const Trajectory& tr = trajectory();
        const ExpansionResult& ex = expansion();
        const FitWindow window = sc_.rate_window();
        const double eps = sc_.expansion.target_epsilon;
        rows_.clear();
        for (const auto& spec : sc_.expansion.norms) {
            const NormSeries scale = norm_series(tr, spec);
            std::vector<double> floor(scale.values.size());
            for (std::size_t i = 0; i < floor.size(); ++i) floor[i] = kResolutionFloor * scale.values[i];
            for (int N = 1; N <= sc_.expansion.n_max; ++N) {
                const NormSeries s = remainder_series(tr, ex.terms, N, spec);
                VerifyRow row{N, spec, fit_rate(s, window, &floor), Verdict::inconclusive, {}};
                if (row.fit.floor_dominated) {
                    bool all_floor = true;
                    for (std::size_t i = 0; i < s.values.size(); ++i) all_floor = all_floor && s.values[i] <= floor[i] + 1e-300;
                    row.note = all_floor ? "inconclusive-at-floor (pass: expansion matches trajectory to resolution)"
                                         : "inconclusive-at-floor";
                } else if (meets_rate(row.fit, N + eps)) {
                    row.verdict = Verdict::pass;
                    row.note = "pass";
                } else {
                    row.verdict = Verdict::fail;
                    row.note = "fail";
                }
                const std::string stem = "remainder_N" + std::to_string(N) + "_" + io::spec_label(spec);
                io::write_text(dir_ / "norms" / (stem + ".csv"), io::series_csv(s));
                io::write_text(dir_ / "reports" / (stem + ".tsv"), io::series_tsv(s, row.fit));
                rows_.push_back(std::move(row));
            }
        }
        bool any_fail = false, any_inconclusive = false;
        std::ostringstream rep;
        rep << "scenario: " << sc_.name << "\ntarget_epsilon: " << io::fmt(eps) << "\nwindow: " << io::fmt(window.t_a) << " "
            << io::fmt(window.t_b) << "\nexpansion: " << (overridden_ ? "loaded" : "built") << "\n";
        rep << "N\talpha\tsigma\tthreshold\tslope\trms\tsamples\tverdict\n";
        for (const auto& r : rows_) {
            any_fail = any_fail || r.verdict == Verdict::fail;
            any_inconclusive = any_inconclusive || r.verdict == Verdict::inconclusive;
            rep << r.N << "\t" << io::fmt(r.spec.alpha) << "\t" << io::fmt(r.spec.sigma) << "\t"
                << io::fmt(-(r.N + eps) + kSlopeSlack) << "\t" << (r.fit.floor_dominated ? "-" : io::fmt(r.fit.slope)) << "\t"
                << (r.fit.floor_dominated ? "-" : io::fmt(r.fit.rms_residual)) << "\t" << r.fit.samples << "\t" << r.note
                << "\n";
        }
        const ExitCode code = any_fail ? ExitCode::checks_failed : any_inconclusive ? ExitCode::inconclusive : ExitCode::ok;
        rep << "result: " << (code == ExitCode::ok ? "pass" : code == ExitCode::checks_failed ? "fail" : "inconclusive") << "\n";
        io::write_text(dir_ / "reports" / "verify.txt", rep.str());
        return code;
    }

    [[nodiscard]] const std::vector<CertificateReport>& certificate_reports() const { return certs_; }

    ExitCode run_certify() {
        certs_.clear();
        std::ostringstream rep;
        rep << "scenario: " << sc_.name << "\ncertificates: " << sc_.certificates.size() << "\n";
        bool violated = false, inapplicable = false;
        if (!sc_.certificates.empty() || sc_.energy_bound) {
            const Trajectory& tr = trajectory();
            for (std::size_t i = 0; i < sc_.certificates.size(); ++i) {
                CertificateReport cr = certificate_check(tr, sc_.certificates[i], sc_.force);
                const auto& c = cr.cert;
                rep << "certificate " << i << ": alpha " << io::fmt(c.alpha) << " delta " << io::fmt(c.delta) << " lambda "
                    << io::fmt(c.lambda) << " sigma " << io::fmt(c.sigma) << " K " << io::fmt(c.K) << " C0 " << io::fmt(c.C0())
                    << " C1 " << io::fmt(c.C1()) << " t_star " << io::fmt(c.t_star()) << "\n";
                if (!cr.applicable) {
                    inapplicable = true;
                    rep << "  verdict: inapplicable\n";
                    for (const auto& m : cr.hypothesis_failures) rep << "  hypothesis: " << m << "\n";
                } else {
                    violated = violated || !cr.holds;
                    rep << "  verdict: " << (cr.holds ? "holds" : "violated") << "\n  min_norm_margin: "
                        << io::fmt(cr.min_norm_margin) << "\n  min_integral_margin: " << io::fmt(cr.min_integral_margin) << "\n";
                    std::ostringstream csv;
                    csv << "t,norm_value,norm_bound,norm_margin,integral_value,integral_bound,integral_margin\n";
                    for (const auto& r : cr.rows)
                        csv << io::fmt(r.t) << "," << io::fmt(r.norm_value) << "," << io::fmt(r.norm_bound) << ","
                            << io::fmt(r.norm_bound - r.norm_value) << "," << io::fmt(r.integral_value) << ","
                            << io::fmt(r.integral_bound) << "," << io::fmt(r.integral_bound - r.integral_value) << "\n";
                    io::write_text(dir_ / "reports" / ("certificate_" + std::to_string(i) + ".csv"), csv.str());
                }
                certs_.push_back(std::move(cr));
            }
            if (sc_.energy_bound) {
                const auto energy = energy_decay_rows(tr, sc_.energy_bound->m_star, sc_.energy_bound->kappa0);
                const auto diss = dissipation_rows(tr, sc_.energy_bound->m_star, sc_.energy_bound->kappa0);
                double me = std::numeric_limits<double>::infinity(), md = me;
                for (const auto& r : energy) me = std::min(me, r.bound - r.value);
                for (const auto& r : diss) md = std::min(md, r.bound - r.value);
                const bool ok = me >= 0.0 && md >= 0.0;
                violated = violated || !ok;
                rep << "energy_bound: M_star " << io::fmt(sc_.energy_bound->m_star) << " kappa0 "
                    << io::fmt(sc_.energy_bound->kappa0) << "\n  min_energy_margin: " << io::fmt(me)
                    << "\n  min_dissipation_margin: " << io::fmt(md) << "\n  verdict: " << (ok ? "holds" : "violated") << "\n";
            }
        }
        const ExitCode code = violated ? ExitCode::checks_failed : inapplicable ? ExitCode::inconclusive : ExitCode::ok;
        rep << "result: " << (code == ExitCode::ok ? "pass" : code == ExitCode::checks_failed ? "fail" : "inconclusive") << "\n";
        io::write_text(dir_ / "reports" / "certify.txt", rep.str());
        return code;
    }

private:
    static std::size_t support_size(const FieldPolynomial& p) {
        std::set<WaveVector> s;
        for (const auto& c : p.coeffs())
            for (auto k : c.support()) s.insert(k);
        return s.size();
    }

    Scenario sc_;
    std::filesystem::path dir_;
    std::optional<Trajectory> traj_;
    std::optional<ExpansionResult> expansion_;
    ResonantData resonant_;
    std::map<int, ResonantFit> fits_;
    bool overridden_ = false;
    std::vector<VerifyRow> rows_;
    std::vector<CertificateReport> certs_;
};

}  // namespace nsexp
