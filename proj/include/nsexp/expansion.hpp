#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/operators.hpp"
#include "nsexp/polynomial.hpp"

namespace nsexp {

/// f_n(t) e^{-n t} contribution to the force.
struct ForceTerm {
    int n = 1;
    FieldPolynomial f;
};

/// Part of the force beyond the expanded terms, field * e^{-rate t}.
struct ExponentialRemainder {
    double rate = 0.0;
    SpectralField field;
};

/// f(t) = Σ_n f_n(t) e^{-n t} + remainder(t), all coefficients divergence-free.
struct ForceExpansion {
    std::vector<ForceTerm> terms;
    std::vector<ExponentialRemainder> remainder;

    void validate() const {
        int last = 0;
        for (const auto& term : terms) {
            if (term.n <= last)
                throw InvalidInput("force levels must be strictly increasing and >= 1 (got " + std::to_string(term.n) + ")");
            last = term.n;
            for (int d = 0; d <= term.f.degree(); ++d)
                require_divergence_free(term.f.coeff(d), "force level " + std::to_string(term.n) + " coefficient t^" +
                                                             std::to_string(d));
        }
        for (const auto& r : remainder) {
            if (!std::isfinite(r.rate)) throw InvalidInput("force remainder rate must be finite");
            require_divergence_free(r.field, "force remainder field");
        }
    }

    /// f_n, or the zero polynomial when level n is absent.
    [[nodiscard]] FieldPolynomial level(int n) const {
        for (const auto& term : terms)
            if (term.n == n) return term.f;
        return {};
    }

    /// Largest |k|^2 carried by any force coefficient.
    [[nodiscard]] std::int64_t max_eigenvalue() const {
        std::int64_t m = 0;
        for (const auto& term : terms)
            for (const auto& c : term.f.coeffs())
                for (const auto& e : c.entries()) m = std::max(m, e.k.eigenvalue());
        for (const auto& r : remainder)
            for (const auto& e : r.field.entries()) m = std::max(m, e.k.eigenvalue());
        return m;
    }
};

/// Resonant constants xi_n = R_n u_n(0); absent levels are zero.
using ResonantData = std::map<int, SpectralField>;

struct ResonanceHit {
    int n = 0;
    std::int64_t eigenvalue = 0;
};

struct ExpansionResult {
    std::vector<ExpansionTerm> terms;
    std::map<int, double> residuals;
    std::vector<ResonanceHit> resonance_log;

    [[nodiscard]] const FieldPolynomial& q(int n) const {
        for (const auto& t : terms)
            if (t.n == n) return t.q;
        throw MissingLevels("expansion has no level " + std::to_string(n));
    }
};

namespace detail {

inline FieldPolynomial shifted_stokes(const FieldPolynomial& q, int n) {
    return q.map_coeffs([n](const SpectralField& c) {
        return c.map_entries([n](WaveVector k, const Vec3& v) { return static_cast<double>(k.eigenvalue() - n) * v; });
    });
}

inline FieldPolynomial nonlinear_sum(const std::map<int, const FieldPolynomial*>& q, int n) {
    FieldPolynomial sum;
    for (int k = 1; k < n; ++k) {
        auto a = q.find(k);
        auto b = q.find(n - k);
        if (a == q.end() || b == q.end()) throw MissingLevels("level " + std::to_string(n) + " needs levels below it");
        sum = sum + poly_bilinear(*a->second, *b->second);
    }
    return sum;
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, const std::string& ctx) {
    throw E(ctx + ": " + e.what());
}

inline std::map<int, const FieldPolynomial*> index_terms(const std::vector<ExpansionTerm>& terms) {
    std::map<int, const FieldPolynomial*> q;
    for (const auto& t : terms) q[t.n] = &t.q;
    return q;
}

}  // namespace detail

/// Right-hand side p_n = f_n - Σ_{k+m=n} B(q_k, q_m) of the level-n equation
/// q_n' + (A - n) q_n = p_n.
inline FieldPolynomial level_forcing(const std::vector<ExpansionTerm>& lower, const ForceExpansion& force, int n) {
    return force.level(n) - detail::nonlinear_sum(detail::index_terms(lower), n);
}

/// Max relative coefficient residual of q_n' + (A - n) q_n + Σ B(q_k, q_m) - f_n.
inline double expansion_residual(const std::vector<ExpansionTerm>& terms, const ForceExpansion& force, int n) {
    if (n < 1) throw InvalidInput("level must be >= 1");
    const auto q = detail::index_terms(terms);
    for (int j = 1; j <= n; ++j)
        if (!q.count(j)) throw MissingLevels("residual at level " + std::to_string(n) + " needs q_" + std::to_string(j));
    const FieldPolynomial& qn = *q.at(n);
    const FieldPolynomial dq = poly_derivative(qn);
    const FieldPolynomial aq = detail::shifted_stokes(qn, n);
    const FieldPolynomial nl = detail::nonlinear_sum(q, n);
    const FieldPolynomial f = force.level(n);
    const double scale = std::max({dq.max_abs_coeff(), aq.max_abs_coeff(), nl.max_abs_coeff(), f.max_abs_coeff()});
    if (scale == 0.0) return 0.0;
    const FieldPolynomial r = dq + aq + nl - f;
    return r.max_abs_coeff() / scale;
}

/// Builds q_1..q_N level by level. Each level's forcing is split by Stokes
/// eigenvalue; the block with eigenvalue lambda solves q' + (lambda - n) q = R_lambda p_n,
/// and the resonant block lambda = n takes R_n q_n(0) = xi_n (zero when absent).
inline ExpansionResult build_expansion(const ForceExpansion& force, int N, const ResonantData& resonant = {}) {
    if (N < 1) throw InvalidInput("expansion order N must be >= 1");
    force.validate();
    ExpansionResult result;
    for (int n = 1; n <= N; ++n) {
        const std::string ctx = "level " + std::to_string(n);
        std::optional<SpectralField> xi;
        if (auto it = resonant.find(n); it != resonant.end() && !it->second.is_zero()) {
            for (const auto& e : it->second.entries())
                if (max_abs(e.c) != 0.0 && e.k.eigenvalue() != n)
                    throw SupportError(ctx + ": resonant constant xi_" + std::to_string(n) + " has mode " +
                                       e.k.to_string() + " with |k|^2 = " + std::to_string(e.k.eigenvalue()) +
                                       ", expected " + std::to_string(n));
            require_divergence_free(it->second, ctx + ": resonant constant");
            xi = it->second;
        }

        FieldPolynomial p;
        try {
            p = level_forcing(result.terms, force, n);
        } catch (const DegreeCapExceeded& e) {
            detail::rethrow_with_context(e, ctx);
        }

        std::set<std::int64_t> lambdas;
        for (const auto& c : p.coeffs())
            for (const auto& e : c.entries())
                if (max_abs(e.c) != 0.0) lambdas.insert(e.k.eigenvalue());
        if (xi) lambdas.insert(n);

        FieldPolynomial qn;
        for (std::int64_t lam : lambdas) {
            const FieldPolynomial block = poly_eigenspace_project(p, lam);
            const double beta = static_cast<double>(lam - n);
            try {
                if (lam == n) {
                    qn = qn + resolvent_solve(block, 0.0, xi.value_or(SpectralField{}));
                    result.resonance_log.push_back({n, lam});
                } else {
                    qn = qn + resolvent_solve(block, beta);
                }
            } catch (const DegreeCapExceeded& e) {
                detail::rethrow_with_context(e, ctx + ", eigenvalue " + std::to_string(lam));
            }
        }
        result.terms.push_back({n, qn});
        result.residuals[n] = expansion_residual(result.terms, force, n);
    }
    return result;
}

struct LevelNormIndex {
    int n = 1;
    double alpha = 0.0;
    double mu = 0.0;
};

/// Per-level indices alpha_n = alpha_* - (n-1)/2, mu_n = mu_* - (n-1)/2 for
/// the finite approximation; requires mu_* >= alpha_* >= N_*/2.
inline std::vector<LevelNormIndex> finite_approximation_plan(double alpha_star, double mu_star, int n_star) {
    if (n_star < 1) throw InvalidInput("N_* must be >= 1");
    if (!(mu_star >= alpha_star && alpha_star >= n_star / 2.0))
        throw InvalidInput("finite approximation requires mu_* >= alpha_* >= N_*/2 (got alpha_*=" +
                           std::to_string(alpha_star) + ", mu_*=" + std::to_string(mu_star) +
                           ", N_*=" + std::to_string(n_star) + ")");
    std::vector<LevelNormIndex> plan;
    for (int n = 1; n <= n_star; ++n) {
        const double shift = (n - 1) / 2.0;
        plan.push_back({n, alpha_star - shift, mu_star - shift});
    }
    return plan;
}

}  // namespace nsexp
