#pragma once

// Shared generators and independent oracles for the test suites.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "nsexp/nsexp.hpp"

namespace nsexp::fixtures {

/// Random divergence-free field with modes drawn from |k|_inf <= radius.
inline SpectralField random_field(std::mt19937_64& rng, int radius, int modes, double scale = 1.0) {
    std::uniform_int_distribution<int> ki(-radius, radius);
    std::normal_distribution<double> g(0.0, scale);
    std::map<WaveVector, Vec3> acc;
    while (static_cast<int>(acc.size()) < modes) {
        WaveVector k{ki(rng), ki(rng), ki(rng)};
        if (k.is_zero()) continue;
        k = k.canonical();
        acc[k] = Vec3{Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
    }
    return leray_project(SpectralField::from_map(acc));
}

inline double rel_diff(const SpectralField& a, const SpectralField& b) {
    const double s = std::max({a.max_abs_coeff(), b.max_abs_coeff(), 1e-300});
    return max_abs_diff(a, b) / s;
}

/// Brute-force B(u,v): every ordered pair (m, l) of the full supports, all
/// output signs kept, then projected mode by mode; the canonical half is
/// returned after checking the other half is its conjugate.
inline SpectralField brute_force_bilinear(const SpectralField& u, const SpectralField& v) {
    std::map<WaveVector, Vec3> all;
    for (const auto& m : u.full_support())
        for (const auto& l : v.full_support()) {
            const WaveVector k = m.k + l.k;
            if (k.is_zero()) continue;
            Complex a = 0.0;
            a += m.c[0] * double(l.k.k1);
            a += m.c[1] * double(l.k.k2);
            a += m.c[2] * double(l.k.k3);
            for (int i = 0; i < 3; ++i) all[k][i] += Complex(0.0, 1.0) * a * l.c[i];
        }
    std::map<WaveVector, Vec3> canon;
    for (auto& [k, c] : all) {
        const double kk = double(k.eigenvalue());
        const Complex s = (c[0] * double(k.k1) + c[1] * double(k.k2) + c[2] * double(k.k3)) / kk;
        Vec3 p{c[0] - s * double(k.k1), c[1] - s * double(k.k2), c[2] - s * double(k.k3)};
        if (k.is_canonical()) canon[k] = p;
    }
    return SpectralField::from_map(canon);
}

/// B(u,v) through physical space: (u·∇)v is evaluated by direct trigonometric
/// sums on an n^3 grid, its Fourier coefficients are taken by direct
/// summation, and the Leray projection is applied. Exact when n exceeds twice
/// the largest |k|_inf of the product.
inline SpectralField physical_space_bilinear(const SpectralField& u, const SpectralField& v, int n) {
    const double two_pi = 2.0 * std::acos(-1.0);
    const auto uf = u.full_support();
    const auto vf = v.full_support();
    std::vector<std::array<double, 3>> prod(static_cast<std::size_t>(n * n * n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const double x[3] = {two_pi * a / n, two_pi * b / n, two_pi * c / n};
                std::array<Complex, 3> uu{}, grad[3]{};
                for (const auto& e : uf) {
                    const Complex ph = std::exp(Complex(0, e.k.k1 * x[0] + e.k.k2 * x[1] + e.k.k3 * x[2]));
                    for (int i = 0; i < 3; ++i) uu[i] += e.c[i] * ph;
                }
                for (const auto& e : vf) {
                    const Complex ph = std::exp(Complex(0, e.k.k1 * x[0] + e.k.k2 * x[1] + e.k.k3 * x[2]));
                    const int kk[3] = {e.k.k1, e.k.k2, e.k.k3};
                    for (int j = 0; j < 3; ++j)
                        for (int i = 0; i < 3; ++i) grad[j][i] += Complex(0, kk[j]) * e.c[i] * ph;
                }
                std::array<double, 3> r{};
                for (int i = 0; i < 3; ++i) {
                    Complex s = 0.0;
                    for (int j = 0; j < 3; ++j) s += uu[j] * grad[j][i];
                    r[i] = s.real();
                }
                prod[static_cast<std::size_t>((a * n + b) * n + c)] = r;
            }
    std::map<WaveVector, Vec3> out;
    const int h = (n - 1) / 2;
    for (int k1 = 0; k1 <= h; ++k1)
        for (int k2 = -h; k2 <= h; ++k2)
            for (int k3 = -h; k3 <= h; ++k3) {
                const WaveVector k{k1, k2, k3};
                if (k.is_zero() || !k.is_canonical()) continue;
                Vec3 c{};
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int cc = 0; cc < n; ++cc) {
                            const Complex ph =
                                std::exp(Complex(0, -two_pi * (k1 * a + k2 * b + k3 * cc) / n));
                            const auto& r = prod[static_cast<std::size_t>((a * n + b) * n + cc)];
                            for (int i = 0; i < 3; ++i) c[i] += r[i] * ph;
                        }
                const double inv = 1.0 / (double(n) * n * n);
                c = inv * c;
                if (max_abs(c) > 1e-13) out[k] = c;
            }
    return leray_project(SpectralField::from_map(out));
}

/// Solves (j+1) q_{j+1} + beta q_j = p_j, j = 0..d, as a dense linear system
/// by Gaussian elimination with partial pivoting (scalar coefficients).
inline std::vector<Complex> linear_system_resolvent(const std::vector<Complex>& p, double beta) {
    const std::size_t n = p.size();
    std::vector<std::vector<Complex>> M(n, std::vector<Complex>(n + 1, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        M[j][j] = beta;
        if (j + 1 < n) M[j][j + 1] = double(j + 1);
        M[j][n] = p[j];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const Complex f = M[r][c] / M[c][c];
            for (std::size_t k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
        }
    }
    std::vector<Complex> q(n);
    for (std::size_t j = 0; j < n; ++j) q[j] = M[j][n] / M[j][j];
    return q;
}

/// Resonant constants matching the initial state: xi_n is chosen so that
/// Σ_{m<=L} R_n q_m(0) = R_n u0, iterated to a fixed point. Valid when the
/// expansion converges at t = 0 (small data).
inline ResonantData initial_state_resonant_data(const ForceExpansion& force, const SpectralField& u0, int L,
                                                int iterations = 40) {
    ResonantData d;
    for (int it = 0; it < iterations; ++it) {
        const auto ex = build_expansion(force, L, d);
        const SpectralField mismatch = assemble(ex.terms, 0.0) - u0;
        for (int n = 1; n <= L; ++n)
            if (is_eigenvalue(n)) d[n] = d[n] - eigenspace_project(mismatch, n);
    }
    return d;
}

/// Constant force on |k|^2 = 2 used by the rate-ladder checks; |phi| = amplitude.
inline SpectralField rate_ladder_phi(double amplitude = 0.05) {
    const auto raw = SpectralField::from_entries({
        {{1, 1, 0}, {Complex(0.3, 0.1), Complex(-0.2, 0.4), Complex(0.5, -0.2)}},
        {{1, 0, 1}, {Complex(-0.1, 0.3), Complex(0.6, 0.0), Complex(0.2, 0.2)}},
        {{0, 1, 1}, {Complex(0.4, -0.3), Complex(0.1, 0.5), Complex(-0.3, 0.1)}},
    });
    const auto phi = leray_project(raw);
    return (amplitude / norm(phi)) * phi;
}

/// Divergence-free field on the |k|^2 = 1 modes with B(q,q) != 0.
inline SpectralField manufactured_q(double scale = 0.3) {
    return scale * SpectralField::from_entries({
                       {{1, 0, 0}, {Complex(0.0), Complex(0.8, 0.1), Complex(-0.3, 0.5)}},
                       {{0, 1, 0}, {Complex(0.4, -0.2), Complex(0.0), Complex(0.6, 0.3)}},
                       {{0, 0, 1}, {Complex(-0.5, 0.2), Complex(0.3, 0.7), Complex(0.0)}},
                   });
}

inline ForceExpansion single_level_force(int n, const SpectralField& f) {
    ForceExpansion force;
    force.terms.push_back({n, FieldPolynomial::constant(f)});
    return force;
}

}  // namespace nsexp::fixtures
