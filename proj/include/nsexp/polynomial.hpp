#pragma once

#include <climits>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/operators.hpp"
#include "nsexp/spectral_field.hpp"

namespace nsexp {

/// Polynomials above this degree are refused.
inline constexpr int kMaxDegree = 64;

/// Degree of the zero polynomial.
inline constexpr int kZeroDegree = INT_MIN;

/// Time polynomial with field-valued coefficients; coeffs[d] multiplies t^d.
/// Trailing zero coefficients are removed on construction.
class FieldPolynomial {
public:
    FieldPolynomial() = default;
    explicit FieldPolynomial(std::vector<SpectralField> coeffs) : coeffs_(std::move(coeffs)) {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
        if (degree() > kMaxDegree)
            throw DegreeCapExceeded("polynomial degree " + std::to_string(degree()) + " exceeds cap " +
                                    std::to_string(kMaxDegree));
    }
    static FieldPolynomial constant(SpectralField c) { return FieldPolynomial({std::move(c)}); }

    [[nodiscard]] int degree() const { return coeffs_.empty() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
    [[nodiscard]] const std::vector<SpectralField>& coeffs() const { return coeffs_; }

    /// Coefficient of t^d; zero field beyond the degree.
    [[nodiscard]] SpectralField coeff(int d) const {
        if (d < 0 || d >= static_cast<int>(coeffs_.size())) return {};
        return coeffs_[static_cast<std::size_t>(d)];
    }

    template <class Fn>
    [[nodiscard]] FieldPolynomial map_coeffs(Fn&& fn) const {
        std::vector<SpectralField> out;
        out.reserve(coeffs_.size());
        for (const auto& c : coeffs_) out.push_back(fn(c));
        return FieldPolynomial(std::move(out));
    }

    static FieldPolynomial combine(double a, const FieldPolynomial& p, double b, const FieldPolynomial& q) {
        const std::size_t n = std::max(p.coeffs_.size(), q.coeffs_.size());
        std::vector<SpectralField> out(n);
        for (std::size_t d = 0; d < n; ++d)
            out[d] = SpectralField::combine(a, p.coeff(static_cast<int>(d)), b, q.coeff(static_cast<int>(d)));
        return FieldPolynomial(std::move(out));
    }

    friend FieldPolynomial operator+(const FieldPolynomial& p, const FieldPolynomial& q) { return combine(1, p, 1, q); }
    friend FieldPolynomial operator-(const FieldPolynomial& p, const FieldPolynomial& q) { return combine(1, p, -1, q); }
    friend FieldPolynomial operator*(double s, const FieldPolynomial& p) {
        return p.map_coeffs([s](const SpectralField& c) { return s * c; });
    }
    friend bool operator==(const FieldPolynomial& p, const FieldPolynomial& q) { return p.coeffs_ == q.coeffs_; }

    [[nodiscard]] double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, c.max_abs_coeff());
        return m;
    }

private:
    std::vector<SpectralField> coeffs_;
};

/// u_n(t) = q(t) e^{-n t}.
struct ExpansionTerm {
    int n = 1;
    FieldPolynomial q;
};

/// Horner evaluation.
inline SpectralField poly_eval(const FieldPolynomial& p, double t) {
    if (p.is_zero()) return {};
    const auto& c = p.coeffs();
    if (t == 0.0) return c.front();
    SpectralField acc = c.back();
    for (int d = p.degree() - 1; d >= 0; --d) acc = SpectralField::combine(t, acc, 1.0, c[static_cast<std::size_t>(d)]);
    return acc;
}

inline FieldPolynomial poly_derivative(const FieldPolynomial& p) {
    if (p.degree() < 1) return {};
    std::vector<SpectralField> out;
    for (int d = 1; d <= p.degree(); ++d) out.push_back(static_cast<double>(d) * p.coeff(d));
    return FieldPolynomial(std::move(out));
}

/// Cauchy product in t with B applied to the coefficients.
inline FieldPolynomial poly_bilinear(const FieldPolynomial& p, const FieldPolynomial& q) {
    if (p.is_zero() || q.is_zero()) return {};
    const int deg = p.degree() + q.degree();
    if (deg > kMaxDegree)
        throw DegreeCapExceeded("product degree " + std::to_string(deg) + " exceeds cap " + std::to_string(kMaxDegree));
    std::vector<SpectralField> out(static_cast<std::size_t>(deg + 1));
    for (int i = 0; i <= p.degree(); ++i)
        for (int j = 0; j <= q.degree(); ++j)
            out[static_cast<std::size_t>(i + j)] += bilinear(p.coeff(i), q.coeff(j));
    return FieldPolynomial(std::move(out));
}

/// Fieldwise projection of every coefficient onto the |k|^2 = lambda modes.
inline FieldPolynomial poly_eigenspace_project(const FieldPolynomial& p, std::int64_t lambda) {
    return p.map_coeffs([lambda](const SpectralField& c) { return eigenspace_project(c, lambda); });
}

/// Polynomial solution q of q' + beta q = p.
///
/// For beta != 0 this is the unique polynomial solution, obtained by the
/// backward recurrence q_d = p_d / beta, q_{j} = (p_j - (j+1) q_{j+1}) / beta;
/// it coincides with the closed-form integrals e^{-beta t} ∫_{-inf}^t e^{beta s} p(s) ds
/// (beta > 0) and -e^{-beta t} ∫_t^{inf} e^{beta s} p(s) ds (beta < 0).
/// For beta == 0 the antiderivative is taken with q(0) = xi, which must be given.
inline FieldPolynomial resolvent_solve(const FieldPolynomial& p, double beta,
                                       const std::optional<SpectralField>& xi = std::nullopt) {
    if (p.degree() > kMaxDegree) throw DegreeCapExceeded("input degree exceeds cap");
    if (beta == 0.0) {
        if (!xi) throw MissingResonantData("resonant solve (beta = 0) needs the constant xi");
        if (p.degree() + 1 > kMaxDegree)
            throw DegreeCapExceeded("resonant solve would exceed degree cap " + std::to_string(kMaxDegree));
        std::vector<SpectralField> out;
        out.push_back(*xi);
        for (int d = 0; d <= p.degree(); ++d) out.push_back((1.0 / (d + 1)) * p.coeff(d));
        return FieldPolynomial(std::move(out));
    }
    if (p.is_zero()) return {};
    const int deg = p.degree();
    std::vector<SpectralField> q(static_cast<std::size_t>(deg + 1));
    q[static_cast<std::size_t>(deg)] = (1.0 / beta) * p.coeff(deg);
    for (int j = deg - 1; j >= 0; --j)
        q[static_cast<std::size_t>(j)] =
            (1.0 / beta) * SpectralField::combine(1.0, p.coeff(j), -(j + 1.0), q[static_cast<std::size_t>(j + 1)]);
    return FieldPolynomial(std::move(q));
}

/// Σ_n q_n(t) e^{-n t}.
inline SpectralField assemble(const std::vector<ExpansionTerm>& terms, double t) {
    SpectralField acc;
    for (const auto& term : terms) acc = SpectralField::combine(1.0, acc, std::exp(-term.n * t), poly_eval(term.q, t));
    return acc;
}

}  // namespace nsexp
