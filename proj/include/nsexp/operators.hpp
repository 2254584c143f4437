#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/spectral_field.hpp"

namespace nsexp {

/// Sobolev exponent alpha and Gevrey radius sigma of the norm |A^alpha e^{sigma A^{1/2}} u|.
struct NormSpec {
    double alpha = 0.0;
    double sigma = 0.0;

    void validate() const {
        if (!std::isfinite(alpha) || !std::isfinite(sigma) || alpha < 0.0 || sigma < 0.0)
            throw InvalidInput("norm spec requires finite alpha >= 0 and sigma >= 0");
    }

    /// |k|^{2 alpha} e^{sigma |k|} for a mode with |k|^2 = eigenvalue.
    [[nodiscard]] double weight(std::int64_t eigenvalue) const {
        const double lam = static_cast<double>(eigenvalue);
        double w = alpha == 0.0 ? 1.0 : std::pow(lam, alpha);
        if (sigma != 0.0) w *= std::exp(sigma * std::sqrt(lam));
        return w;
    }
};

/// Removes the component of each coefficient along its wave vector.
inline SpectralField leray_project(const SpectralField& raw) {
    return raw.map_entries([](WaveVector k, const Vec3& c) {
        const double k2 = static_cast<double>(k.eigenvalue());
        const Complex s = dot(c, k) / k2;
        const auto kr = k.as_real();
        return Vec3{c[0] - s * kr[0], c[1] - s * kr[1], c[2] - s * kr[2]};
    });
}

/// Largest |û(k)·k|/|k| over the stored modes.
inline double divergence_defect(const SpectralField& u) {
    double m = 0.0;
    for (const auto& e : u.entries())
        m = std::max(m, std::abs(dot(e.c, e.k)) / std::sqrt(static_cast<double>(e.k.eigenvalue())));
    return m;
}

inline SpectralField stokes_power(const SpectralField& u, double alpha) {
    const NormSpec spec{alpha, 0.0};
    return u.map_entries([&](WaveVector k, const Vec3& c) { return spec.weight(k.eigenvalue()) * c; });
}

inline SpectralField gevrey_weight(const SpectralField& u, const NormSpec& spec) {
    spec.validate();
    return u.map_entries([&](WaveVector k, const Vec3& c) { return spec.weight(k.eigenvalue()) * c; });
}

/// |u|_{alpha,sigma}: l2 norm over all modes (both halves of each pair) of the weighted coefficients.
inline double norm(const SpectralField& u, const NormSpec& spec = {}) {
    spec.validate();
    CompensatedSum s;
    for (const auto& e : u.entries()) {
        const double w = spec.weight(e.k.eigenvalue());
        s.add(2.0 * w * w * norm2(e.c));
    }
    return std::sqrt(s.value());
}

/// Real L2-type inner product sum_k û(k)·conj(v̂(k)) over all modes.
inline double inner(const SpectralField& u, const SpectralField& v) {
    CompensatedSum s;
    for (const auto& e : u.entries()) {
        if (!v.contains(e.k)) continue;
        const Vec3 w = v.at(e.k);
        for (int i = 0; i < 3; ++i) s.add(2.0 * std::real(e.c[i] * std::conj(w[i])));
    }
    return s.value();
}

/// Divergence-free to rel_tol relative to the field's largest coefficient.
inline bool is_divergence_free(const SpectralField& u, double rel_tol = 1e-12) {
    const double scale = u.max_abs_coeff();
    return divergence_defect(u) <= rel_tol * scale;
}

inline void require_divergence_free(const SpectralField& u, const std::string& what, double rel_tol = 1e-12) {
    if (!is_divergence_free(u, rel_tol))
        throw NotDivergenceFree(what + " is not divergence-free (defect " + std::to_string(divergence_defect(u)) + ")");
}

/// B(u,v) = P[(u·∇)v]: exact convolution b̂(k) = Σ_{m+l=k} i(û(m)·l) v̂(l) over the
/// finite supports, followed by the Leray projection. Exactly-zero outputs are dropped.
/// A positive cutoff keeps only outputs with |k|^2 <= cutoff.
inline SpectralField bilinear(const SpectralField& u, const SpectralField& v, std::int64_t cutoff = 0) {
    const auto uf = u.full_support();
    const auto vf = v.full_support();
    std::map<WaveVector, Vec3> acc;
    const Complex I{0.0, 1.0};
    for (const auto& m : uf) {
        for (const auto& l : vf) {
            const WaveVector k = m.k + l.k;
            if (k.is_zero() || !k.is_canonical()) continue;
            if (cutoff > 0 && k.eigenvalue() > cutoff) continue;
            const Complex a = dot(m.c, l.k);
            if (a == Complex{}) continue;
            acc[k] += (I * a) * l.c;
        }
    }
    return leray_project(SpectralField::from_map(acc)).pruned();
}

/// R_n: the modes with |k|^2 = n.
inline SpectralField eigenspace_project(const SpectralField& u, std::int64_t n) {
    if (n < 1) throw InvalidInput("eigenspace index must be >= 1");
    return u.filter([n](WaveVector k) { return k.eigenvalue() == n; });
}

/// P_n = Σ_{j<=n} R_j: the modes with |k|^2 <= n.
inline SpectralField cumulative_project(const SpectralField& u, std::int64_t n) {
    if (n < 1) throw InvalidInput("eigenspace index must be >= 1");
    return u.filter([n](WaveVector k) { return k.eigenvalue() <= n; });
}

/// Integers n <= nmax that are |k|^2 for some nonzero k in Z^3.
inline std::vector<std::int64_t> eigenvalues_up_to(std::int64_t nmax) {
    if (nmax < 1) throw InvalidInput("nmax must be >= 1");
    std::vector<bool> hit(static_cast<std::size_t>(nmax + 1), false);
    std::int64_t r = 0;
    while ((r + 1) * (r + 1) <= nmax) ++r;
    for (std::int64_t a = 0; a <= r; ++a)
        for (std::int64_t b = a; b <= r; ++b)
            for (std::int64_t c = b; c <= r; ++c) {
                const std::int64_t s = a * a + b * b + c * c;
                if (s >= 1 && s <= nmax) hit[static_cast<std::size_t>(s)] = true;
            }
    std::vector<std::int64_t> out;
    for (std::int64_t n = 1; n <= nmax; ++n)
        if (hit[static_cast<std::size_t>(n)]) out.push_back(n);
    return out;
}

inline bool is_eigenvalue(std::int64_t n) {
    if (n < 1) return false;
    const auto ev = eigenvalues_up_to(n);
    return !ev.empty() && ev.back() == n;
}

/// Distinct |k|^2 over the stored modes, ascending.
inline std::vector<std::int64_t> eigenvalues_in_support(const SpectralField& u) {
    std::set<std::int64_t> s;
    for (const auto& e : u.entries()) s.insert(e.k.eigenvalue());
    return {s.begin(), s.end()};
}

}  // namespace nsexp
