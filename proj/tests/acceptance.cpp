// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace nsexp;
using namespace nsexp::fixtures;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

SolverConfig solver(std::int64_t M, double h, double T, int stride) {
    SolverConfig c;
    c.mode_cutoff = M;
    c.step = h;
    c.t_end = T;
    c.sample_stride = stride;
    return c;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome expansion_exactness() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> nlev(1, 3), deg(0, 3);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        ForceExpansion force;
        std::set<int> levels;
        const int count = nlev(rng);
        while (static_cast<int>(levels.size()) < count) levels.insert(nlev(rng));
        for (int n : levels) {
            std::vector<SpectralField> c;
            const int d = deg(rng);
            for (int j = 0; j <= d; ++j) c.push_back(random_field(rng, 2, 3, 0.3));
            force.terms.push_back({n, FieldPolynomial(c)});
        }
        ResonantData xi;
        for (int n = 1; n <= 3; ++n)
            if (auto c = eigenspace_project(random_field(rng, 2, 6, 0.2), n); !c.empty()) xi[n] = c;
        const auto ex = build_expansion(force, 3, xi);
        for (const auto& [n, r] : ex.residuals) worst = std::max(worst, r);
    }
    return {worst <= 1e-10, "max residual " + num(worst)};
}

// ---------------------------------------------------------------- 2

Outcome manufactured_solution() {
    const auto q = manufactured_q();
    const auto force = single_level_force(2, bilinear(q, q));
    const auto ex = build_expansion(force, 2, {{1, q}});
    const bool exact = ex.q(1) == FieldPolynomial::constant(q) && ex.q(2).is_zero();
    const auto traj = integrate(q, force, solver(8, 1e-3, 5.0, 10));
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto ref = assemble(ex.terms, traj.times[i]);
        worst = std::max(worst, norm(traj.states[i] - ref) / norm(ref));
    }
    return {exact && worst <= 1e-6,
            std::string("q1 = q, q2 = 0: ") + (exact ? "exact" : "NOT exact") + "; max relative error " + num(worst)};
}

// ---------------------------------------------------------------- 3, 4, 8

struct LadderSlopes {
    // [sigma index][N - 1]
    RateFit fit[2][2];
};

LadderSlopes ladder(std::int64_t M) {
    const auto force = single_level_force(1, rate_ladder_phi(0.05));
    const auto traj = integrate(SpectralField{}, force, solver(M, 1e-3, 12.0, 10));
    const auto data = calibrate_resonant_data(traj, force, 2, {3.0, 8.0}).first;
    const auto ex = build_expansion(force, 2, data);
    LadderSlopes out;
    const NormSpec specs[2] = {{0.5, 0.0}, {0.5, 0.1}};
    for (int s = 0; s < 2; ++s)
        for (int N = 1; N <= 2; ++N)
            out.fit[s][N - 1] = fit_rate(remainder_series(traj, ex.terms, N, specs[s]), default_window(12.0));
    return out;
}

Outcome ladder_outcome(const LadderSlopes& l, int s) {
    bool ok = true;
    std::string d;
    for (int N = 1; N <= 2; ++N) {
        const auto& f = l.fit[s][N - 1];
        ok = ok && meets_rate(f, N + 0.5);
        d += "N=" + std::to_string(N) + " slope " + num(f.slope) + " (<= " + num(-(N + 0.5) + kSlopeSlack) + ", rms " +
             num(f.rms_residual) + ")" + (N == 1 ? "; " : "");
    }
    return {ok, d};
}

// ---------------------------------------------------------------- 5

Outcome certificate() {
    const DecayCertificate cert{0.5, 0.5, 1.0, 0.0, 2.0};
    const auto force = single_level_force(1, rate_ladder_phi(0.05));
    const auto traj = integrate(manufactured_q(0.03), force, solver(12, 1e-3, 8.0, 10));
    const auto rep = certificate_check(traj, cert, force);
    if (!rep.applicable) return {false, "hypotheses not met: " + rep.hypothesis_failures.front()};
    return {rep.holds, "C0 " + num(cert.C0()) + ", C1 " + num(cert.C1()) + "; min norm margin " +
                           num(rep.min_norm_margin) + ", min integral margin " + num(rep.min_integral_margin) + " over " +
                           std::to_string(rep.rows.size()) + " samples"};
}

// ---------------------------------------------------------------- 6

Outcome energy_identity() {
    const auto force = single_level_force(1, rate_ladder_phi(0.05));
    auto max_defect = [&](double h) {
        const auto traj = integrate(SpectralField{}, force, solver(12, h, 12.0, 1));
        const auto d = energy_ledger(traj, force);
        return *std::max_element(d.begin(), d.end());
    };
    const double d1 = max_defect(1e-3), d2 = max_defect(5e-4);
    const double ratio = d1 / d2;
    return {d1 <= 1e-6 && ratio >= 3.5, "max defect " + num(d1) + " at h=1e-3, reduction " + num(ratio) + "x at h/2"};
}

// ---------------------------------------------------------------- 7

Outcome structural() {
    std::mt19937_64 rng(77);
    std::vector<std::string> failures;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };

    double leray_idem = 0.0, leray_orth = 0.0, bvv = 0.0, als_ratio = 0.0;
    for (int i = 0; i < 100; ++i) {
        std::map<WaveVector, Vec3> raw;
        std::normal_distribution<double> g;
        for (int j = 0; j < 6; ++j) {
            WaveVector k{int(rng() % 5) - 2, int(rng() % 5) - 2, int(rng() % 5) - 2};
            if (k.is_zero()) continue;
            raw[k.canonical()] = {Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
        }
        const auto w = SpectralField::from_map(raw);
        const auto p = leray_project(w);
        leray_idem = std::max(leray_idem, max_abs_diff(leray_project(p), p) / std::max(1e-300, p.max_abs_coeff()));
        leray_orth = std::max(leray_orth, std::abs(inner(p, w - p)) / std::max(1e-300, norm(w) * norm(w)));

        const auto u = random_field(rng, 2, 4), v = random_field(rng, 2, 4);
        const auto b = bilinear(u, v);
        bvv = std::max(bvv, std::abs(inner(b, v)) / (norm(b) * norm(v)));

        std::uniform_real_distribution<double> ua(0.1, 3.0), us(0.05, 2.0);
        const double alpha = ua(rng), sigma = us(rng);
        const double rhs = std::pow(2.0 * alpha / (std::exp(1.0) * sigma), 2.0 * alpha) * norm(u, {0.0, sigma});
        als_ratio = std::max(als_ratio, norm(u, {alpha, 0.0}) / rhs);
    }
    check(leray_idem <= 1e-14, "Leray idempotence " + num(leray_idem));
    check(leray_orth <= 1e-12, "Leray orthogonality " + num(leray_orth));
    check(bvv <= 1e-12, "b(u,v,v) " + num(bvv));
    check(als_ratio <= 1.0 + 1e-12, "Sobolev-Gevrey inequality ratio " + num(als_ratio));

    double div = 0.0;
    bool hermitian = true;
    const auto traj = integrate(manufactured_q(0.5), single_level_force(1, rate_ladder_phi(0.5)), solver(12, 1e-3, 4.0, 20));
    for (const auto& u : traj.states) {
        div = std::max(div, divergence_defect(u) / std::max(1e-300, u.max_abs_coeff()));
        for (const auto& e : u.entries()) {
            hermitian = hermitian && e.k.is_canonical();
            const Vec3 back = u.at(-e.k);
            hermitian = hermitian && back == conj(e.c);
        }
    }
    check(div <= 1e-11, "trajectory divergence " + num(div));
    check(hermitian, "trajectory Hermitian symmetry");

    std::set<std::int64_t> excluded;
    for (std::int64_t a = 1; a <= 100; a *= 4)
        for (std::int64_t b = 0; a * (8 * b + 7) <= 100; ++b) excluded.insert(a * (8 * b + 7));
    const auto eig = eigenvalues_up_to(100);
    std::set<std::int64_t> missing;
    for (std::int64_t n = 1; n <= 100; ++n)
        if (!std::binary_search(eig.begin(), eig.end(), n)) missing.insert(n);
    check(missing == excluded, "eigenvalue gaps up to 100");

    double resolvent = 0.0;
    std::normal_distribution<double> g;
    const WaveVector k{1, 2, 0};
    for (double beta : {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0})
        for (int degree = 0; degree <= 6; ++degree) {
            std::array<std::vector<Complex>, 3> scalar;
            std::vector<SpectralField> coeffs;
            for (int d = 0; d <= degree; ++d) {
                const auto c = leray_project(SpectralField::from_entries(
                    {{k, {Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))}}}));
                for (int i = 0; i < 3; ++i) scalar[i].push_back(c.at(k)[i]);
                coeffs.push_back(c);
            }
            const auto q = resolvent_solve(FieldPolynomial(coeffs), beta);
            for (int i = 0; i < 3; ++i) {
                const auto oracle = linear_system_resolvent(scalar[i], beta);
                double scale = 0.0, err = 0.0;
                for (int d = 0; d <= degree; ++d) {
                    scale = std::max(scale, std::abs(oracle[d]));
                    err = std::max(err, std::abs(q.coeff(d).at(k)[i] - oracle[d]));
                }
                if (scale > 0.0) resolvent = std::max(resolvent, err / scale);
            }
        }
    check(resolvent <= 1e-12, "resolvent vs linear system " + num(resolvent));

    std::string d = "Leray " + num(leray_idem) + "/" + num(leray_orth) + ", b(u,v,v) " + num(bvv) + ", div " + num(div) +
                    ", inequality ratio " + num(als_ratio) + ", gaps " + std::to_string(missing.size()) +
                    ", resolvent " + num(resolvent);
    for (const auto& f : failures) d += "; failed: " + f;
    return {failures.empty(), d};
}

// ---------------------------------------------------------------- 9

Outcome finite_plan() {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> un(1, 6);
    std::uniform_real_distribution<double> ux(0.0, 2.0);
    int good = 0, rejected = 0;
    for (int i = 0; i < 10; ++i) {
        const int n_star = un(rng);
        const double a = n_star / 2.0 + ux(rng);
        const double m = a + ux(rng);
        const auto plan = finite_approximation_plan(a, m, n_star);
        bool ok = static_cast<int>(plan.size()) == n_star;
        for (int n = 1; ok && n <= n_star; ++n) {
            const auto& row = plan[n - 1];
            ok = row.n == n && row.alpha == a - (n - 1) / 2.0 && row.mu == m - (n - 1) / 2.0;
        }
        good += ok;

        // Violations: alpha_* below N_*/2, or mu_* below alpha_*.
        const double bad_a = n_star / 2.0 - 0.01 - ux(rng) / 4.0;
        for (auto [aa, mm] : {std::pair{bad_a, bad_a + 1.0}, std::pair{a, a - 0.01 - ux(rng) / 4.0}}) {
            try {
                finite_approximation_plan(aa, mm, n_star);
            } catch (const InvalidInput&) {
                ++rejected;
            }
        }
    }
    return {good == 10 && rejected == 20,
            std::to_string(good) + "/10 plans match, " + std::to_string(rejected) + "/20 violations rejected"};
}

template <class Fn>
bool run(int id, const std::string& title, double budget_s, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget_s <= 0.0 || secs < budget_s;
    const bool pass = o.pass && in_time;
    std::printf("criterion %d: %s  %s: %s [%.2f s%s]\n", id, pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(), secs,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main() {
    bool all = true;
    all &= run(1, "expansion exactness", 5.0, expansion_exactness);
    all &= run(2, "manufactured solution", 30.0, manufactured_solution);

    LadderSlopes m12{}, m24{};
    all &= run(3, "rate ladder |.|_{1/2,0}", 120.0, [&] {
        m12 = ladder(12);
        return ladder_outcome(m12, 0);
    });
    all &= run(4, "rate ladder |.|_{1/2,0.1}", 0.0, [&] { return ladder_outcome(m12, 1); });
    all &= run(5, "decay certificate", 60.0, certificate);
    all &= run(6, "energy identity", 0.0, energy_identity);
    all &= run(7, "structural suite", 0.0, structural);
    all &= run(8, "truncation robustness (M 12 -> 24)", 0.0, [&] {
        m24 = ladder(24);
        double worst = 0.0;
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n < 2; ++n) worst = std::max(worst, std::abs(m24.fit[s][n].slope - m12.fit[s][n].slope));
        return Outcome{worst < 0.02, "max slope change " + num(worst)};
    });
    all &= run(9, "finite-approximation plan", 0.0, finite_plan);
    return all ? 0 : 1;
}
