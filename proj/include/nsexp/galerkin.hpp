#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/expansion.hpp"
#include "nsexp/operators.hpp"
#include "nsexp/parallel.hpp"
#include "nsexp/polynomial.hpp"

namespace nsexp {

struct SolverConfig {
    std::int64_t mode_cutoff = 8;  // retain |k|^2 <= mode_cutoff
    double step = 1e-3;
    double t_end = 1.0;
    int sample_stride = 1;
    /// 0 means thread_budget().
    unsigned threads = 0;

    void validate() const {
        if (mode_cutoff < 1) throw InvalidInput("solver.mode_cutoff must be >= 1");
        if (!(step > 0.0) || step > 0.5) throw InvalidInput("solver.step must lie in (0, 0.5]");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("solver.t_end must be positive");
        if (sample_stride < 1) throw InvalidInput("solver.sample_stride must be >= 1");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    SolverConfig config;
    /// Canonical modes carried by every state, ascending.
    std::vector<WaveVector> modes;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] double spacing() const { return config.step * config.sample_stride; }
};

/// Σ_n f_n(t) e^{-n t} plus the configured remainder.
inline SpectralField evaluate_force(const ForceExpansion& force, double t) {
    SpectralField acc;
    for (const auto& term : force.terms)
        acc = SpectralField::combine(1.0, acc, std::exp(-term.n * t), poly_eval(term.f, t));
    for (const auto& r : force.remainder) acc = SpectralField::combine(1.0, acc, std::exp(-r.rate * t), r.field);
    return acc;
}

namespace detail {

/// Modes of the truncated system that can ever be nonzero: the closure of the
/// data's modes under addition, restricted to |k|^2 <= cutoff.
inline std::vector<WaveVector> active_modes(const std::vector<WaveVector>& generators, std::int64_t cutoff) {
    std::set<WaveVector> full;
    for (auto k : generators)
        if (!k.is_zero() && k.eigenvalue() <= cutoff) {
            full.insert(k);
            full.insert(-k);
        }
    std::vector<WaveVector> frontier(full.begin(), full.end());
    while (!frontier.empty()) {
        std::vector<WaveVector> next;
        const std::vector<WaveVector> all(full.begin(), full.end());
        for (auto m : frontier)
            for (auto l : all) {
                const WaveVector k = m + l;
                if (k.is_zero() || k.eigenvalue() > cutoff) continue;
                if (full.insert(k).second) {
                    next.push_back(k);
                    if (full.insert(-k).second) next.push_back(-k);
                }
            }
        frontier = std::move(next);
    }
    std::vector<WaveVector> canon;
    for (auto k : full)
        if (k.is_canonical()) canon.push_back(k);
    return canon;
}

/// Dense representation of the truncated nonlinearity over a fixed mode set.
class TriadKernel {
public:
    TriadKernel(std::vector<WaveVector> modes, unsigned threads) : modes_(std::move(modes)), threads_(threads) {
        std::map<WaveVector, std::size_t> index;
        for (std::size_t i = 0; i < modes_.size(); ++i) index[modes_[i]] = i;
        // Full mode j in [0, 2C): j < C is modes_[j], j >= C is -modes_[j - C].
        const std::size_t C = modes_.size();
        auto full = [&](std::size_t j) { return j < C ? modes_[j] : -modes_[j - C]; };
        offsets_.assign(C + 1, 0);
        std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> per_out(C);
        for (std::size_t a = 0; a < 2 * C; ++a)
            for (std::size_t b = 0; b < 2 * C; ++b) {
                const WaveVector k = full(a) + full(b);
                if (k.is_zero() || !k.is_canonical()) continue;
                auto it = index.find(k);
                if (it == index.end()) continue;
                per_out[it->second].emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
            }
        for (std::size_t o = 0; o < C; ++o) {
            offsets_[o + 1] = offsets_[o] + per_out[o].size();
            for (auto& pr : per_out[o]) triads_.push_back(pr);
        }
        eigen_.resize(C);
        for (std::size_t i = 0; i < C; ++i) eigen_[i] = static_cast<double>(modes_[i].eigenvalue());
    }

    [[nodiscard]] std::size_t size() const { return modes_.size(); }
    [[nodiscard]] const std::vector<WaveVector>& modes() const { return modes_; }
    [[nodiscard]] double eigenvalue(std::size_t i) const { return eigen_[i]; }
    [[nodiscard]] std::size_t triad_count() const { return triads_.size(); }

    /// out = P_M B(u, u) over the mode set.
    void apply(const std::vector<Vec3>& u, std::vector<Vec3>& out) const {
        const std::size_t C = modes_.size();
        out.assign(C, Vec3{});
        auto value = [&](std::uint32_t j) { return j < C ? u[j] : conj(u[j - C]); };
        auto wave = [&](std::uint32_t j) { return j < C ? modes_[j] : -modes_[j - C]; };
        auto work = [&](std::size_t b, std::size_t e) {
            const Complex I{0.0, 1.0};
            for (std::size_t o = b; o < e; ++o) {
                Vec3 acc{};
                for (std::size_t t = offsets_[o]; t < offsets_[o + 1]; ++t) {
                    const auto [m, l] = triads_[t];
                    const Complex a = dot(value(m), wave(l));
                    acc += (I * a) * value(l);
                }
                const WaveVector k = modes_[o];
                const Complex s = dot(acc, k) / eigen_[o];
                const auto kr = k.as_real();
                out[o] = Vec3{acc[0] - s * kr[0], acc[1] - s * kr[1], acc[2] - s * kr[2]};
            }
        };
        const unsigned threads = triads_.size() > 200000 ? threads_ : 1u;
        parallel_for(C, threads, work);
    }

private:
    std::vector<WaveVector> modes_;
    unsigned threads_;
    std::vector<std::size_t> offsets_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> triads_;
    std::vector<double> eigen_;
};

inline std::vector<Vec3> densify(const SpectralField& f, const std::vector<WaveVector>& modes) {
    std::vector<Vec3> out(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) out[i] = f.at(modes[i]);
    return out;
}

inline SpectralField sparsify(const std::vector<Vec3>& u, const std::vector<WaveVector>& modes) {
    std::vector<SpectralField::Entry> e(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) e[i] = {modes[i], u[i]};
    return SpectralField::from_sorted(std::move(e));
}

}  // namespace detail

/// Integrates du/dt + A u + P_M B(u,u) = P_M f on the modes |k|^2 <= M with
/// the integrating-factor RK4 scheme: the linear part is advanced exactly by
/// e^{-hA} and classical RK4 is applied to v = e^{(t - t_n)A} u on each step.
inline Trajectory integrate(const SpectralField& u0, const ForceExpansion& force, const SolverConfig& cfg) {
    cfg.validate();
    force.validate();
    require_divergence_free(u0, "initial state");
    if (force.max_eigenvalue() > cfg.mode_cutoff)
        throw InvalidInput("solver.mode_cutoff " + std::to_string(cfg.mode_cutoff) +
                           " is below the largest force eigenvalue " + std::to_string(force.max_eigenvalue()));
    for (const auto& e : u0.entries())
        if (max_abs(e.c) != 0.0 && e.k.eigenvalue() > cfg.mode_cutoff)
            throw InvalidInput("initial state has mode " + e.k.to_string() + " beyond the cutoff");

    std::vector<WaveVector> gens = u0.support();
    for (const auto& term : force.terms)
        for (const auto& c : term.f.coeffs())
            for (auto k : c.support()) gens.push_back(k);
    for (const auto& r : force.remainder)
        for (auto k : r.field.support()) gens.push_back(k);

    const detail::TriadKernel kernel(detail::active_modes(gens, cfg.mode_cutoff),
                                     cfg.threads == 0 ? thread_budget() : cfg.threads);
    const auto& modes = kernel.modes();
    const std::size_t C = modes.size();

    // Force as dense per-level coefficient arrays.
    struct DenseLevel {
        double rate;
        std::vector<std::vector<Vec3>> coeffs;  // by power of t
    };
    std::vector<DenseLevel> levels;
    for (const auto& term : force.terms) {
        DenseLevel lv{static_cast<double>(term.n), {}};
        for (const auto& c : term.f.coeffs()) lv.coeffs.push_back(detail::densify(c, modes));
        levels.push_back(std::move(lv));
    }
    for (const auto& r : force.remainder) levels.push_back({r.rate, {detail::densify(r.field, modes)}});

    auto force_at = [&](double t, std::vector<Vec3>& f) {
        f.assign(C, Vec3{});
        for (const auto& lv : levels) {
            const double w = std::exp(-lv.rate * t);
            double tp = 1.0;
            for (const auto& c : lv.coeffs) {
                for (std::size_t i = 0; i < C; ++i) f[i] += (w * tp) * c[i];
                tp *= t;
            }
        }
    };

    std::vector<Vec3> bu, fu;
    auto rhs = [&](const std::vector<Vec3>& u, double t, std::vector<Vec3>& out) {
        kernel.apply(u, bu);
        force_at(t, fu);
        out.resize(C);
        for (std::size_t i = 0; i < C; ++i) out[i] = fu[i] - bu[i];
    };

    const double h = cfg.step;
    std::vector<double> E(C), E2(C);
    for (std::size_t i = 0; i < C; ++i) {
        E[i] = std::exp(-h * kernel.eigenvalue(i));
        E2[i] = std::exp(-0.5 * h * kernel.eigenvalue(i));
    }

    Trajectory traj;
    traj.config = cfg;
    traj.modes = modes;
    std::vector<Vec3> u = detail::densify(u0, modes);
    const long long steps = std::llround(cfg.t_end / h);
    traj.times.push_back(0.0);
    traj.states.push_back(detail::sparsify(u, modes));

    std::vector<Vec3> a, b, c, d, stage(C);
    for (long long s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * h;
        rhs(u, t, a);
        for (std::size_t i = 0; i < C; ++i) stage[i] = E2[i] * (u[i] + (0.5 * h) * a[i]);
        rhs(stage, t + 0.5 * h, b);
        for (std::size_t i = 0; i < C; ++i) stage[i] = E2[i] * u[i] + (0.5 * h) * b[i];
        rhs(stage, t + 0.5 * h, c);
        for (std::size_t i = 0; i < C; ++i) stage[i] = E[i] * u[i] + (h * E2[i]) * c[i];
        rhs(stage, t + h, d);
        double energy = 0.0;
        for (std::size_t i = 0; i < C; ++i) {
            u[i] = E[i] * u[i] + (h / 6.0) * (E[i] * a[i] + (2.0 * E2[i]) * (b[i] + c[i]) + d[i]);
            energy += 2.0 * norm2(u[i]);
        }
        if (!std::isfinite(energy) || std::sqrt(energy) > 1e6)
            throw SolverDivergence("solution norm exceeded 1e6 at t = " + std::to_string(t + h) +
                                   " (mis-scaled scenario or step too large)");
        if ((s + 1) % cfg.sample_stride == 0) {
            traj.times.push_back(static_cast<double>(s + 1) * h);
            traj.states.push_back(detail::sparsify(u, modes));
        }
    }
    return traj;
}

/// Per-interval defect, per unit time, of the energy identity
/// ½|u(t)|² + ∫‖u‖² = ½|u(t0)|² + ∫<f,u>, with trapezoidal quadrature.
inline std::vector<double> energy_ledger(const Trajectory& traj, const ForceExpansion& force) {
    std::vector<double> defects;
    if (traj.size() < 2) return defects;
    const double dt0 = traj.times[1] - traj.times[0];
    std::vector<double> half_e(traj.size()), diss(traj.size()), work(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i > 0 && std::abs((traj.times[i] - traj.times[i - 1]) - dt0) > 1e-9 * std::max(1.0, dt0))
            throw InvalidInput("energy ledger needs uniform sampling");
        const auto& u = traj.states[i];
        const double n0 = norm(u);
        const double n1 = norm(u, {0.5, 0.0});
        half_e[i] = 0.5 * n0 * n0;
        diss[i] = n1 * n1;
        work[i] = inner(evaluate_force(force, traj.times[i]), u);
    }
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        const double lhs = half_e[i + 1] - half_e[i] + 0.5 * dt * (diss[i] + diss[i + 1]);
        const double rhs = 0.5 * dt * (work[i] + work[i + 1]);
        defects.push_back(std::abs(lhs - rhs) / dt);
    }
    return defects;
}

}  // namespace nsexp
